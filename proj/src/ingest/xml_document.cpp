#include "ingest/xml_document.hpp"

#include "sheetscape/errors.hpp"

#include <expat.h>

#include <climits>

namespace sheetscape::detail {

namespace {

// Expat reports namespaced names as "uri|local"; keep the local part.
std::string local_name(const XML_Char* name) {
  std::string_view n(name);
  const auto bar = n.rfind('|');
  return std::string(bar == std::string_view::npos ? n : n.substr(bar + 1));
}

struct BuildState {
  std::unique_ptr<XmlElement> root;
  std::vector<XmlElement*> stack;
};

void on_start(void* data, const XML_Char* name, const XML_Char** atts) {
  auto* st = static_cast<BuildState*>(data);
  auto el = std::make_unique<XmlElement>();
  el->name = local_name(name);
  for (int i = 0; atts[i] != nullptr; i += 2) {
    el->attributes.emplace_back(local_name(atts[i]), atts[i + 1]);
  }
  XmlElement* raw = el.get();
  if (st->stack.empty()) {
    st->root = std::move(el);
  } else {
    st->stack.back()->children.push_back(std::move(el));
  }
  st->stack.push_back(raw);
}

void on_end(void* data, const XML_Char*) {
  static_cast<BuildState*>(data)->stack.pop_back();
}

void on_text(void* data, const XML_Char* s, int len) {
  auto* st = static_cast<BuildState*>(data);
  if (!st->stack.empty()) st->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

const std::string* XmlElement::attr(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string XmlElement::attr_or(std::string_view key, std::string fallback) const {
  const auto* v = attr(key);
  return v ? *v : std::move(fallback);
}

const XmlElement* XmlElement::child(std::string_view child_name) const {
  for (const auto& c : children) {
    if (c->name == child_name) return c.get();
  }
  return nullptr;
}

std::unique_ptr<XmlElement> parse_xml(std::string_view xml, const std::string& part) {
  if (xml.size() > static_cast<std::size_t>(INT_MAX)) {
    throw MalformedPart(part, "part too large");
  }
  BuildState st;
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(
      XML_ParserCreateNS(nullptr, '|'), &XML_ParserFree);
  if (!parser) throw MalformedPart(part, "cannot create XML parser");
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);
  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), 1) ==
      XML_STATUS_ERROR) {
    throw MalformedPart(
        part, std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) +
                  " at line " +
                  std::to_string(XML_GetCurrentLineNumber(parser.get())));
  }
  if (!st.root) throw MalformedPart(part, "no root element");
  return std::move(st.root);
}

}  // namespace sheetscape::detail
