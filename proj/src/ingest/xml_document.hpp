#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sheetscape::detail {

/// Minimal element tree. Element and attribute names are stored without
/// namespace prefixes, which is enough for the spreadsheet parts we read.
struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<std::unique_ptr<XmlElement>> children;
  std::string text;  // concatenated character data directly inside

  const std::string* attr(std::string_view key) const;
  std::string attr_or(std::string_view key, std::string fallback) const;
  const XmlElement* child(std::string_view child_name) const;

  template <typename F>
  void for_each_child(std::string_view child_name, F&& f) const {
    for (const auto& c : children) {
      if (c->name == child_name) f(*c);
    }
  }
};

/// Parses a whole document. Throws MalformedPart naming `part` on error.
std::unique_ptr<XmlElement> parse_xml(std::string_view xml, const std::string& part);

}  // namespace sheetscape::detail
