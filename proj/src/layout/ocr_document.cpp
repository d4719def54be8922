#include "mmc/ocr_document.hpp"

#include <cmath>
#include <limits>

namespace mmc::layout {

using nlohmann::json;

OcrFormatError::OcrFormatError(Kind kind, std::string message, std::string value)
    : std::runtime_error(std::move(message)), kind_(kind), value_(std::move(value)) {}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw OcrFormatError(OcrFormatError::Kind::MalformedResponse, "malformed OCR document: " + what);
}

double number_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) malformed(where + " needs numeric '" + key + "'");
  return it->get<double>();
}

json number_to_json(double v) {
  if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  return v;
}

TextLine line_from_json(const json& j, std::size_t index) {
  const std::string where = "lines[" + std::to_string(index) + "]";
  if (!j.is_object()) malformed(where + " is not an object");

  TextLine line;
  auto id = j.find("id");
  if (id == j.end() || !id->is_number_integer()) malformed(where + " needs integer 'id'");
  const auto raw_id = id->get<std::int64_t>();
  if (raw_id < std::numeric_limits<int>::min() || raw_id > std::numeric_limits<int>::max()) {
    malformed(where + " id out of range");
  }
  line.id = static_cast<int>(raw_id);

  auto box = j.find("box");
  if (box == j.end() || !box->is_array() || box->size() != 4) {
    malformed(where + " needs 'box' as [x, y, w, h]");
  }
  for (const auto& v : *box) {
    if (!v.is_number()) malformed(where + " box entries must be numbers");
  }
  line.box = Box{(*box)[0].get<double>(), (*box)[1].get<double>(), (*box)[2].get<double>(),
                 (*box)[3].get<double>()};

  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) malformed(where + " needs string 'text'");
  line.text = text->get<std::string>();

  auto cls = j.find("class");
  if (cls == j.end() || !cls->is_string()) malformed(where + " needs string 'class'");
  line.cls = line_class_from_string(cls->get<std::string>());

  if (auto conf = j.find("confidence"); conf != j.end()) {
    if (!conf->is_number()) malformed(where + " 'confidence' must be a number");
    line.confidence = conf->get<double>();
  }
  return line;
}

}  // namespace

LineClass line_class_from_string(std::string_view name) {
  if (name == "printed") return LineClass::Printed;
  if (name == "handwritten") return LineClass::Handwritten;
  if (name == "equation") return LineClass::Equation;
  throw OcrFormatError(OcrFormatError::Kind::UnknownClass,
                       "unknown line class '" + std::string(name) + "'", std::string(name));
}

OcrDocument ocr_document_from_json(const json& j) {
  if (!j.is_object()) malformed("top level is not an object");
  auto page = j.find("page");
  if (page == j.end() || !page->is_object()) malformed("missing 'page' object");
  auto lines = j.find("lines");
  if (lines == j.end() || !lines->is_array()) malformed("missing 'lines' array");

  OcrDocument doc;
  doc.page = PageGeometry{number_field(*page, "width", "page"), number_field(*page, "height", "page")};
  doc.lines.reserve(lines->size());
  for (std::size_t i = 0; i < lines->size(); ++i) {
    doc.lines.push_back(line_from_json((*lines)[i], i));
  }
  return doc;
}

OcrDocument parse_ocr_document(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) malformed("not valid JSON");
  return ocr_document_from_json(j);
}

json to_json(const TextLine& line) {
  return json{{"id", line.id},
              {"box", json::array({number_to_json(line.box.x), number_to_json(line.box.y),
                                   number_to_json(line.box.width), number_to_json(line.box.height)})},
              {"text", line.text},
              {"class", to_string(line.cls)},
              {"confidence", line.confidence}};
}

json to_json(const OcrDocument& doc) {
  json lines = json::array();
  for (const auto& l : doc.lines) lines.push_back(to_json(l));
  return json{{"page", {{"width", number_to_json(doc.page.width)}, {"height", number_to_json(doc.page.height)}}},
              {"lines", std::move(lines)}};
}

json to_json(const AnswerScript& script) {
  return json{{"problem", script.problem}, {"steps", script.steps}};
}

}  // namespace mmc::layout
