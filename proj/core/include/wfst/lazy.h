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
//
// On-demand machine views: lazy composition and state caching.

#ifndef WFST_LAZY_H_
#define WFST_LAZY_H_

#include <cstddef>
#include <list>
#include <memory>
#include <unordered_map>
#include <vector>

#include "wfst/machine.h"
#include "wfst/rational.h"

namespace wfst {

// Composition computed one state at a time. Pair states (s1, s2, filter)
// receive ids in the order they are first seen; ids stay stable for the
// lifetime of the view. Arcs(s) recomputes the merge on every call.
class LazyCompose : public Fsm {
 public:
  LazyCompose(std::shared_ptr<Fsm> a, std::shared_ptr<Fsm> b);

  SemiringKind Kind() const override { return kind_; }
  StateId Start() override;
  Weight Final(StateId s) override;
  std::vector<Arc> Arcs(StateId s) override;

  // Pair states registered so far.
  size_t NumRegistered() const { return pairs_.size(); }
  // Number of Arcs() calls served.
  size_t NumExpansions() const { return expansions_; }

 private:
  struct Key {
    StateId a, b;
    FilterState f;
    bool operator==(const Key &o) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key &k) const;
  };

  StateId IdOf(const Key &k);
  const Key &PairOf(StateId s) const;

  std::shared_ptr<Fsm> a_, b_;
  SemiringKind kind_;
  std::vector<Key> pairs_;
  std::unordered_map<Key, StateId, KeyHash> ids_;
  StateId start_ = kNoState;
  bool started_ = false;
  size_t expansions_ = 0;
};

// Checks symbol and semiring compatibility, then builds a lazy view over
// copies of the two machines.
std::shared_ptr<LazyCompose> MakeLazyCompose(const Machine &a, const Machine &b);

enum class CacheMode { kMemoize, kLru, kRefcount };

struct CacheDiscipline {
  CacheMode mode = CacheMode::kMemoize;
  // LRU only; must be >= 1.
  size_t capacity = 0;

  static CacheDiscipline Memoize() { return {CacheMode::kMemoize, 0}; }
  static CacheDiscipline Lru(size_t capacity) { return {CacheMode::kLru, capacity}; }
  static CacheDiscipline Refcount() { return {CacheMode::kRefcount, 0}; }
};

// Caching view over another Fsm. Eviction never changes what Arcs() returns,
// only whether the underlying machine is asked again.
//
// REFCOUNT: Acquire(s) pins s in the cache (expanding it if needed) and
// Release(s) unpins it; a state is evicted when its count returns to 0.
// States that are visited without being acquired are not retained.
class CachedFsm : public Fsm {
 public:
  // Throws ContractError on an LRU capacity below 1.
  CachedFsm(std::shared_ptr<Fsm> base, CacheDiscipline d);

  SemiringKind Kind() const override { return base_->Kind(); }
  StateId Start() override;
  Weight Final(StateId s) override;
  std::vector<Arc> Arcs(StateId s) override;

  void Acquire(StateId s);
  void Release(StateId s);

  // Number of times the underlying machine was asked for a state's arcs.
  size_t NumExpansions() const { return expansions_; }
  size_t NumCached() const { return cache_.size(); }

 private:
  struct Entry {
    std::vector<Arc> arcs;
    Weight final;
    int refs = 0;
    std::list<StateId>::iterator lru_pos;
  };

  Entry Compute(StateId s);
  void Touch(Entry &e, StateId s);

  std::shared_ptr<Fsm> base_;
  CacheDiscipline d_;
  std::unordered_map<StateId, Entry> cache_;
  std::list<StateId> lru_;  // Most recent first.
  StateId start_ = kNoState;
  bool started_ = false;
  size_t expansions_ = 0;
};

}  // namespace wfst

#endif  // WFST_LAZY_H_
