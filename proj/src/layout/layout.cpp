#include "mmc/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "utf8.hpp"

namespace mmc::layout {

const char* to_string(LineClass cls) noexcept {
  switch (cls) {
    case LineClass::Printed: return "printed";
    case LineClass::Handwritten: return "handwritten";
    case LineClass::Equation: return "equation";
  }
  return "printed";
}

namespace {

// Clamped box edges used by every ordering rule.
struct Span {
  double x0, y0, x1, y1;
  int id;
  std::size_t input_index;

  double height() const { return y1 - y0; }
};

void validate_page(const PageGeometry& page) {
  if (!(std::isfinite(page.width) && std::isfinite(page.height)) || page.width <= 0 ||
      page.height <= 0) {
    throw InvalidGeometry("page width and height must be positive");
  }
}

std::vector<Span> clamp_to_page(const std::vector<TextLine>& lines, const PageGeometry& page) {
  std::vector<Span> spans;
  spans.reserve(lines.size());
  std::set<int> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const TextLine& l = lines[i];
    const Box& b = l.box;
    const std::string who = "line " + std::to_string(l.id) + ": ";
    if (!(std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.width) &&
          std::isfinite(b.height))) {
      throw InvalidGeometry(who + "box has non-finite coordinates");
    }
    if (b.width <= 0 || b.height <= 0) throw InvalidGeometry(who + "box width and height must be positive");
    if (!(l.confidence >= 0.0 && l.confidence <= 1.0)) throw InvalidGeometry(who + "confidence outside [0,1]");
    if (l.id < 0) throw InvalidGeometry(who + "id must be non-negative");
    if (!ids.insert(l.id).second) throw InvalidGeometry(who + "duplicate id");

    Span s{std::max(b.x, 0.0), std::max(b.y, 0.0), std::min(b.right(), page.width),
           std::min(b.bottom(), page.height), l.id, i};
    if (s.x1 <= s.x0 || s.y1 <= s.y0) throw InvalidGeometry(who + "box lies outside the page");
    spans.push_back(s);
  }
  return spans;
}

// Splits the x-projection wherever the horizontal gap reaches `min_gap`.
std::vector<std::vector<Span>> split_columns(std::vector<Span> spans, double min_gap) {
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.x0, a.x1, a.id) < std::tie(b.x0, b.x1, b.id);
  });
  std::vector<std::vector<Span>> columns;
  double reach = 0;
  for (const Span& s : spans) {
    if (columns.empty() || s.x0 - reach >= min_gap) {
      columns.emplace_back();
      reach = s.x1;
    }
    columns.back().push_back(s);
    reach = std::max(reach, s.x1);
  }
  return columns;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

// Rows are the connected components of the "shares a row" relation.
std::vector<std::vector<Span>> cluster_rows(const std::vector<Span>& column, double overlap_ratio) {
  const std::size_t n = column.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Span& a = column[i];
      const Span& b = column[j];
      const double overlap = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
      if (overlap >= overlap_ratio * std::min(a.height(), b.height())) {
        parent[find_root(parent, i)] = find_root(parent, j);
      }
    }
  }

  std::vector<std::vector<Span>> rows;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find_root(parent, i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(rows.size());
      rows.emplace_back();
    }
    rows[static_cast<std::size_t>(slot[r])].push_back(column[i]);
  }

  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [](const Span& a, const Span& b) {
      return std::tie(a.x0, a.y0, a.id) < std::tie(b.x0, b.y0, b.id);
    });
  }
  auto row_key = [](const std::vector<Span>& row) {
    double y = row.front().y0;
    double x = row.front().x0;
    int id = row.front().id;
    for (const Span& s : row) {
      y = std::min(y, s.y0);
      x = std::min(x, s.x0);
      id = std::min(id, s.id);
    }
    return std::tuple{y, x, id};
  };
  std::sort(rows.begin(), rows.end(),
            [&](const auto& a, const auto& b) { return row_key(a) < row_key(b); });
  return rows;
}

}  // namespace

std::vector<int> order_lines(const std::vector<TextLine>& lines, const PageGeometry& page,
                             const LayoutOptions& options) {
  validate_page(page);
  std::vector<Span> spans = clamp_to_page(lines, page);

  std::vector<int> order;
  order.reserve(spans.size());
  for (const auto& column : split_columns(std::move(spans), options.column_gap_ratio * page.width)) {
    for (const auto& row : cluster_rows(column, options.row_overlap_ratio)) {
      for (const Span& s : row) order.push_back(s.id);
    }
  }
  return order;
}

std::vector<TextLine> sort_lines(const std::vector<TextLine>& lines, const PageGeometry& page,
                                 const LayoutOptions& options) {
  const std::vector<int> order = order_lines(lines, page, options);
  std::vector<TextLine> sorted;
  sorted.reserve(lines.size());
  for (int id : order) {
    auto it = std::find_if(lines.begin(), lines.end(), [id](const TextLine& l) { return l.id == id; });
    sorted.push_back(*it);
  }
  return sorted;
}

DocumentLayout group_regions(const std::vector<TextLine>& ordered) {
  DocumentLayout layout;
  for (const TextLine& line : ordered) {
    if (line.cls == LineClass::Printed) {
      layout.question_line_ids.push_back(line.id);
      std::string text = utf8::trim(line.text);
      if (text.empty()) continue;
      if (!layout.question_text.empty()) layout.question_text += ' ';
      layout.question_text += text;
    } else {
      layout.answer_lines.push_back(line);
    }
  }
  return layout;
}

bool is_continuation(std::string_view trimmed) {
  static constexpr std::string_view kLeaders[] = {"=", "+", "-", "*", "/", "−", "×", "÷"};
  for (std::string_view lead : kLeaders) {
    if (trimmed.substr(0, lead.size()) == lead) return true;
  }
  return false;
}

std::vector<std::string> segment_steps(const std::vector<TextLine>& answer_lines) {
  std::vector<std::string> steps;
  for (const TextLine& line : answer_lines) {
    std::string text = utf8::trim(line.text);
    if (text.empty()) continue;
    if (!steps.empty() && is_continuation(text)) {
      steps.back() += ' ';
      steps.back() += text;
    } else {
      steps.push_back(std::move(text));
    }
  }
  return steps;
}

AnswerScript build_script(const std::vector<TextLine>& lines, const PageGeometry& page,
                          const LayoutOptions& options) {
  DocumentLayout layout = group_regions(sort_lines(lines, page, options));
  return AnswerScript{std::move(layout.question_text), segment_steps(layout.answer_lines)};
}

}  // namespace mmc::layout
