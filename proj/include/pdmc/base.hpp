// base.hpp -- shared small pieces: error taxonomy, interning, sorted-vector
// set helpers.  Everything downstream treats sorted unique vectors as sets so
// that hashing and ordering stay deterministic across runs.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pdmc {

using Id = std::uint32_t;
inline constexpr Id kNoId = static_cast<Id>(-1);

// Every failure mode the library reports deliberately.  Guard kinds map to a
// dedicated process exit code so batch drivers can tell "input was bad" from
// "the construction outgrew its budget".
enum class ErrorKind {
  Syntax,        // unparsable input text
  Input,         // well-formed text, inconsistent content (unknown agent, ...)
  NotOpen,       // PMS violates the open-system requirement
  Fragment,      // formula outside the supported fragment for the operation
  Guard,         // explosion / size / resource budget exceeded
};

struct PdmcError : std::runtime_error {
  ErrorKind kind;
  PdmcError(ErrorKind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) {
  throw PdmcError(k, msg);
}

// ---------------------------------------------------------------------------
// sorted-vector sets

template <class T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

template <class T>
bool sorted_contains(const std::vector<T>& v, const T& x) {
  return std::binary_search(v.begin(), v.end(), x);
}

template <class T>
bool is_subset(const std::vector<T>& a, const std::vector<T>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

template <class T>
std::vector<T> set_union(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------
// hashing for vectors / pairs (FNV-1a style mixing; stability across runs
// matters only within one process, but determinism of *iteration order* is
// achieved by interning, not by hash order)

inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

template <class T>
struct VecHash {
  std::size_t operator()(const std::vector<T>& v) const {
    std::size_t h = v.size();
    for (const auto& x : v) h = hash_mix(h, std::hash<T>{}(x));
    return h;
  }
};

// Interner: maps values to dense ids in first-seen order.  Iterating ids
// 0..size() therefore reproduces insertion order; everything that needs a
// canonical enumeration goes through one of these.
template <class T, class Hash = std::hash<T>>
class Interner {
 public:
  Id intern(const T& value) {
    auto it = index_.find(value);
    if (it != index_.end()) return it->second;
    Id id = static_cast<Id>(values_.size());
    values_.push_back(value);
    index_.emplace(values_.back(), id);
    return id;
  }
  std::optional<Id> find(const T& value) const {
    auto it = index_.find(value);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const T& value(Id id) const { return values_.at(id); }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<T> values_;
  std::unordered_map<T, Id, Hash> index_;
};

// Budget counter shared by the lazily materialised constructions.  The caps
// are generous; tripping one raises ErrorKind::Guard (exit code 3 in the CLI).
struct Budget {
  std::size_t limit;
  std::size_t used = 0;
  const char* what;
  explicit Budget(std::size_t lim, const char* label)
      : limit(lim), what(label) {}
  void charge(std::size_t n = 1) {
    used += n;
    if (used > limit)
      fail(ErrorKind::Guard,
           std::string(what) + " budget exceeded (" + std::to_string(used) +
               " > " + std::to_string(limit) + ")");
  }
};

}  // namespace pdmc
