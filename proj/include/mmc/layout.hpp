#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Stage 1, non-neural part: reading order, question/answer regions and
// step segmentation over recognized OCR lines.
namespace mmc::layout {

enum class LineClass { Printed, Handwritten, Equation };

const char* to_string(LineClass cls) noexcept;  // "printed" | "handwritten" | "equation"

struct Box {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
};

struct TextLine {
  int id = 0;
  Box box;
  std::string text;
  LineClass cls = LineClass::Printed;
  double confidence = 1.0;
};

struct PageGeometry {
  double width = 0;
  double height = 0;
};

struct DocumentLayout {
  std::string question_text;
  std::vector<int> question_line_ids;  // Printed lines, in reading order
  std::vector<TextLine> answer_lines;
};

struct AnswerScript {
  std::string problem;
  std::vector<std::string> steps;
};

struct LayoutOptions {
  double column_gap_ratio = 0.08;  // of page width
  double row_overlap_ratio = 0.5;  // of the shorter line's height
};

class InvalidGeometry : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Reading order as a permutation of line ids: columns left to right, rows
// top to bottom inside a column, lines left to right inside a row, ties by
// (y, x, id). Boxes sticking out of the page are clamped to it first.
// Throws InvalidGeometry for non-positive sizes, confidence outside [0,1],
// duplicate or negative ids, and boxes lying entirely off the page.
std::vector<int> order_lines(const std::vector<TextLine>& lines, const PageGeometry& page,
                             const LayoutOptions& options = {});

// Applies order_lines and returns the lines themselves in that order.
std::vector<TextLine> sort_lines(const std::vector<TextLine>& lines, const PageGeometry& page,
                                 const LayoutOptions& options = {});

DocumentLayout group_regions(const std::vector<TextLine>& ordered);

std::vector<std::string> segment_steps(const std::vector<TextLine>& answer_lines);

// order -> group -> segment.
AnswerScript build_script(const std::vector<TextLine>& lines, const PageGeometry& page,
                          const LayoutOptions& options = {});

// Whether a trimmed line continues the previous step (leading = + − - × * ÷ /).
bool is_continuation(std::string_view trimmed);

}  // namespace mmc::layout
