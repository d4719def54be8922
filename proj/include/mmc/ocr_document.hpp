#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mmc/layout.hpp"

namespace mmc::layout {

// The OCR line document: page geometry plus recognized, classified lines.
// Wire form:
//   {"page": {"width": int, "height": int},
//    "lines": [{"id": int, "box": [x, y, w, h], "text": str,
//               "class": "printed"|"handwritten"|"equation", "confidence": float}]}
// Unknown fields are ignored; a missing confidence reads as 1.0.
struct OcrDocument {
  PageGeometry page;
  std::vector<TextLine> lines;
};

class OcrFormatError : public std::runtime_error {
 public:
  enum class Kind { MalformedResponse, UnknownClass };

  OcrFormatError(Kind kind, std::string message, std::string value = {});

  Kind kind() const noexcept { return kind_; }
  // The offending class string for UnknownClass.
  const std::string& value() const noexcept { return value_; }

 private:
  Kind kind_;
  std::string value_;
};

LineClass line_class_from_string(std::string_view name);  // throws OcrFormatError(UnknownClass)

OcrDocument ocr_document_from_json(const nlohmann::json& j);
OcrDocument parse_ocr_document(std::string_view text);

nlohmann::json to_json(const OcrDocument& doc);
nlohmann::json to_json(const TextLine& line);
nlohmann::json to_json(const AnswerScript& script);

}  // namespace mmc::layout
