// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wfst/lazy.h"

#include <algorithm>
#include <string>

#include "wfst/errors.h"

namespace wfst {

size_t LazyCompose::KeyHash::operator()(const Key &k) const {
  return (static_cast<size_t>(k.a) * 7853) ^ (static_cast<size_t>(k.b) * 1000003) ^
         static_cast<size_t>(k.f);
}

LazyCompose::LazyCompose(std::shared_ptr<Fsm> a, std::shared_ptr<Fsm> b)
    : a_(std::move(a)), b_(std::move(b)), kind_(a_->Kind()) {
  if (a_->Kind() != b_->Kind()) {
    throw KindError("lazy compose: semiring mismatch (" + std::string(KindName(a_->Kind())) +
                    " vs " + std::string(KindName(b_->Kind())) + ")");
  }
}

StateId LazyCompose::IdOf(const Key &k) {
  auto [it, inserted] = ids_.emplace(k, static_cast<StateId>(pairs_.size()));
  if (inserted) pairs_.push_back(k);
  return it->second;
}

const LazyCompose::Key &LazyCompose::PairOf(StateId s) const {
  if (s < 0 || static_cast<size_t>(s) >= pairs_.size()) {
    throw ContractError("lazy compose: unknown state " + std::to_string(s));
  }
  return pairs_[s];
}

StateId LazyCompose::Start() {
  if (!started_) {
    started_ = true;
    const StateId sa = a_->Start();
    const StateId sb = b_->Start();
    if (sa != kNoState && sb != kNoState) start_ = IdOf({sa, sb, FilterState::kStart});
  }
  return start_;
}

Weight LazyCompose::Final(StateId s) {
  const Key k = PairOf(s);
  return TimesFast(kind_, a_->Final(k.a), b_->Final(k.b));
}

std::vector<Arc> LazyCompose::Arcs(StateId s) {
  const Key k = PairOf(s);
  ++expansions_;
  std::vector<Arc> right = b_->Arcs(k.b);
  std::stable_sort(right.begin(), right.end(),
                   [](const Arc &x, const Arc &y) { return x.ilabel < y.ilabel; });
  auto range = [&](Label l) {
    return std::equal_range(right.begin(), right.end(), Arc{l, 0, 0, 0},
                            [](const Arc &x, const Arc &y) { return x.ilabel < y.ilabel; });
  };
  std::vector<Arc> out;
  for (const Arc &x : a_->Arcs(k.a)) {
    if (x.olabel != kEpsilon) {
      auto [lo, hi] = range(x.olabel);
      for (auto it = lo; it != hi; ++it) {
        out.push_back({x.ilabel, it->olabel, TimesFast(kind_, x.weight, it->weight),
                       IdOf({x.nextstate, it->nextstate, FilterState::kStart})});
      }
      continue;
    }
    if (auto f = FilterTransition(k.f, EpsilonMove::kLeftOnly)) {
      out.push_back({x.ilabel, kEpsilon, x.weight, IdOf({x.nextstate, k.b, *f})});
    }
    if (auto f = FilterTransition(k.f, EpsilonMove::kBoth)) {
      auto [lo, hi] = range(kEpsilon);
      for (auto it = lo; it != hi; ++it) {
        out.push_back({x.ilabel, it->olabel, TimesFast(kind_, x.weight, it->weight),
                       IdOf({x.nextstate, it->nextstate, *f})});
      }
    }
  }
  if (auto f = FilterTransition(k.f, EpsilonMove::kRightOnly)) {
    auto [lo, hi] = range(kEpsilon);
    for (auto it = lo; it != hi; ++it) {
      out.push_back({kEpsilon, it->olabel, it->weight, IdOf({k.a, it->nextstate, *f})});
    }
  }
  return out;
}

std::shared_ptr<LazyCompose> MakeLazyCompose(const Machine &a, const Machine &b) {
  CheckComposable(a, b);
  return std::make_shared<LazyCompose>(
      std::make_shared<MachineFsm>(std::make_shared<const Machine>(a)),
      std::make_shared<MachineFsm>(std::make_shared<const Machine>(b)));
}

CachedFsm::CachedFsm(std::shared_ptr<Fsm> base, CacheDiscipline d)
    : base_(std::move(base)), d_(d) {
  if (d_.mode == CacheMode::kLru && d_.capacity < 1) {
    throw ContractError("cache: LRU capacity must be at least 1");
  }
}

StateId CachedFsm::Start() {
  if (!started_) {
    start_ = base_->Start();
    started_ = true;
  }
  return start_;
}

CachedFsm::Entry CachedFsm::Compute(StateId s) {
  ++expansions_;
  Entry e;
  e.arcs = base_->Arcs(s);
  e.final = base_->Final(s);
  return e;
}

void CachedFsm::Touch(Entry &e, StateId s) {
  if (d_.mode != CacheMode::kLru) return;
  lru_.erase(e.lru_pos);
  lru_.push_front(s);
  e.lru_pos = lru_.begin();
}

Weight CachedFsm::Final(StateId s) {
  auto it = cache_.find(s);
  if (it != cache_.end()) return it->second.final;
  return base_->Final(s);
}

std::vector<Arc> CachedFsm::Arcs(StateId s) {
  auto it = cache_.find(s);
  if (it != cache_.end()) {
    Touch(it->second, s);
    return it->second.arcs;
  }
  Entry e = Compute(s);
  switch (d_.mode) {
    case CacheMode::kRefcount:
      return e.arcs;
    case CacheMode::kMemoize:
      return cache_.emplace(s, std::move(e)).first->second.arcs;
    case CacheMode::kLru: {
      lru_.push_front(s);
      e.lru_pos = lru_.begin();
      std::vector<Arc> arcs = e.arcs;
      cache_.emplace(s, std::move(e));
      while (cache_.size() > d_.capacity) {
        cache_.erase(lru_.back());
        lru_.pop_back();
      }
      return arcs;
    }
  }
  return {};
}

void CachedFsm::Acquire(StateId s) {
  if (d_.mode != CacheMode::kRefcount) {
    throw ContractError("cache: Acquire is only meaningful under REFCOUNT");
  }
  auto it = cache_.find(s);
  if (it == cache_.end()) it = cache_.emplace(s, Compute(s)).first;
  ++it->second.refs;
}

void CachedFsm::Release(StateId s) {
  if (d_.mode != CacheMode::kRefcount) {
    throw ContractError("cache: Release is only meaningful under REFCOUNT");
  }
  auto it = cache_.find(s);
  if (it == cache_.end() || it->second.refs == 0) {
    throw ContractError("cache: release of state " + std::to_string(s) + " without acquire");
  }
  if (--it->second.refs == 0) cache_.erase(it);
}

}  // namespace wfst
