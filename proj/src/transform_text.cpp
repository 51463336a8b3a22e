#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "stiffbvp/transform.hpp"

namespace stiffbvp {

std::string to_string(const Transform& transform) {
  if (transform.is_identity()) return "I";
  std::string out;
  if (transform.swap()) out = "SP" + std::to_string(*transform.swap() + 1);
  for (auto l : transform.flips()) out += ".FP" + std::to_string(l + 1);
  return out;
}

namespace {

// Consumes a positive decimal index at the front of `text`.
std::size_t take_index(std::string_view& text, std::string_view full) {
  std::size_t value = 0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin || value == 0)
    throw ConfigError("malformed transform '" + std::string(full) + "'");
  text.remove_prefix(static_cast<std::size_t>(ptr - begin));
  return value - 1;
}

}  // namespace

Transform parse_transform(std::string_view text) {
  const std::string_view full = text;
  if (text == "I") return Transform::identity();
  if (text.empty()) throw ConfigError("empty transform text");
  std::optional<std::size_t> swap;
  std::vector<std::size_t> flips;
  if (text.starts_with("SP")) {
    text.remove_prefix(2);
    swap = take_index(text, full);
  }
  while (!text.empty()) {
    if (!text.starts_with(".FP")) throw ConfigError("malformed transform '" + std::string(full) + "'");
    text.remove_prefix(3);
    flips.push_back(take_index(text, full));
  }
  if (!swap && flips.empty()) throw ConfigError("malformed transform '" + std::string(full) + "'");
  return Transform(swap, std::move(flips));
}

}  // namespace stiffbvp
