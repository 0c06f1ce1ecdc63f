#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sheetscape::detail {

struct FormPart {
  std::string name;
  std::optional<std::string> filename;
  std::string content_type;
  std::string body;
};

/// Boundary parameter of a multipart/form-data content type, if any.
std::optional<std::string> multipart_boundary(std::string_view content_type);

/// Splits a multipart/form-data body. Throws BadMessage.
std::vector<FormPart> parse_multipart(std::string_view body, std::string_view boundary);

}  // namespace sheetscape::detail
