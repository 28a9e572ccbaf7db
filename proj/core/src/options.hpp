#pragma once

// Typed access to the string-valued model options of the experiment config.

#include <charconv>
#include <set>
#include <string>
#include <vector>

#include "hydro/error.hpp"
#include "hydro/model.hpp"

namespace hydro::detail {

class OptionReader {
 public:
  OptionReader(const ModelOptions& options, std::string family)
      : options_(options), family_(std::move(family)) {}

  template <typename T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    auto it = options_.find(key);
    if (it == options_.end()) return;
    out = parse<T>(key, it->second);
  }

  template <typename T>
  void read_list(const std::string& key, std::vector<T>& out) {
    used_.insert(key);
    auto it = options_.find(key);
    if (it == options_.end()) return;
    out.clear();
    std::string item;
    for (char c : it->second + ",") {
      if (c == ',') {
        if (!item.empty()) out.push_back(parse<T>(key, item));
        item.clear();
      } else if (c != ' ') {
        item += c;
      }
    }
  }

  bool has(const std::string& key) const { return options_.count(key) != 0; }

  /// Throws on any option that was never read.
  void finish() const {
    for (const auto& [k, v] : options_) {
      if (!used_.count(k)) throw InvalidArgument(family_ + ": unknown option '" + k + "'");
    }
  }

 private:
  template <typename T>
  T parse(const std::string& key, const std::string& text) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "yes" || text == "1") return true;
      if (text == "false" || text == "no" || text == "0") return false;
      fail(key, text);
    } else if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else {
      T v{};
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) fail(key, text);
      return v;
    }
    return T{};
  }

  [[noreturn]] void fail(const std::string& key, const std::string& text) const {
    throw InvalidArgument(family_ + ": bad value '" + text + "' for option '" + key + "'");
  }

  const ModelOptions& options_;
  std::string family_;
  std::set<std::string> used_;
};

}  // namespace hydro::detail
