#include "scottlab/symbol.hpp"

#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace scottlab {

namespace {

struct InternTable {
  std::shared_mutex mutex;
  std::deque<std::string> names;  // stable addresses
  std::unordered_map<std::string_view, std::uint32_t> index;

  InternTable() { intern(""); }

  std::pair<const std::string*, std::uint32_t> intern(std::string_view name) {
    {
      std::shared_lock lock(mutex);
      if (auto it = index.find(name); it != index.end()) return {&names[it->second], it->second};
    }
    std::unique_lock lock(mutex);
    if (auto it = index.find(name); it != index.end()) return {&names[it->second], it->second};
    names.emplace_back(name);
    auto id = static_cast<std::uint32_t>(names.size() - 1);
    index.emplace(names.back(), id);
    return {&names.back(), id};
  }
};

InternTable& table() {
  static InternTable t;
  return t;
}

}  // namespace

Symbol::Symbol() {
  static const Symbol empty{std::string_view()};
  *this = empty;
}

Symbol::Symbol(std::string_view name) {
  auto [p, id] = table().intern(name);
  name_ = p;
  id_ = id;
}

Symbol equality_symbol() {
  static const Symbol eq("=");
  return eq;
}

}  // namespace scottlab
