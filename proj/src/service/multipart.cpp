#include "service/multipart.hpp"

#include "sheetscape/errors.hpp"

#include <algorithm>
#include <cctype>

namespace sheetscape::detail {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Value of `key=` in a ';'-separated header parameter list.
std::optional<std::string> header_param(std::string_view header, std::string_view key) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    std::size_t end = pos;
    bool quoted = false;
    while (end < header.size() && (quoted || header[end] != ';')) {
      if (header[end] == '"') quoted = !quoted;
      ++end;
    }
    const std::string_view item = trim(header.substr(pos, end - pos));
    const auto eq = item.find('=');
    if (eq != std::string_view::npos && lower(trim(item.substr(0, eq))) == key) {
      std::string_view v = trim(item.substr(eq + 1));
      if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
      return std::string(v);
    }
    pos = end + 1;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> multipart_boundary(std::string_view content_type) {
  const auto semi = content_type.find(';');
  if (lower(trim(content_type.substr(0, semi))) != "multipart/form-data") return std::nullopt;
  if (semi == std::string_view::npos) return std::nullopt;
  auto b = header_param(content_type.substr(semi + 1), "boundary");
  if (!b || b->empty()) return std::nullopt;
  return b;
}

std::vector<FormPart> parse_multipart(std::string_view body, std::string_view boundary) {
  const std::string delim = "--" + std::string(boundary);
  std::vector<FormPart> parts;

  std::size_t pos = body.find(delim);
  if (pos == std::string_view::npos) throw BadMessage("multipart body has no boundary");
  pos += delim.size();
  for (;;) {
    if (body.substr(pos, 2) == "--") return parts;
    if (body.substr(pos, 2) != "\r\n") throw BadMessage("malformed multipart boundary line");
    pos += 2;

    const std::size_t header_end = body.find("\r\n\r\n", pos);
    if (header_end == std::string_view::npos) throw BadMessage("multipart part without headers");
    FormPart part;
    std::string_view headers = body.substr(pos, header_end - pos);
    while (!headers.empty()) {
      const auto eol = headers.find("\r\n");
      const std::string_view line = headers.substr(0, eol);
      headers = eol == std::string_view::npos ? std::string_view{} : headers.substr(eol + 2);
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) continue;
      const std::string name = lower(trim(line.substr(0, colon)));
      const std::string_view value = trim(line.substr(colon + 1));
      if (name == "content-disposition") {
        const auto semi = value.find(';');
        if (semi != std::string_view::npos) {
          const auto params = value.substr(semi + 1);
          part.name = header_param(params, "name").value_or("");
          part.filename = header_param(params, "filename");
        }
      } else if (name == "content-type") {
        part.content_type = std::string(value);
      }
    }

    const std::size_t content = header_end + 4;
    const std::size_t next = body.find("\r\n" + delim, content);
    if (next == std::string_view::npos) throw BadMessage("unterminated multipart part");
    part.body = std::string(body.substr(content, next - content));
    parts.push_back(std::move(part));
    pos = next + 2 + delim.size();
  }
}

}  // namespace sheetscape::detail
