#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "mmc/grading.hpp"
#include "mmc/layout.hpp"
#include "mmc/llm.hpp"
#include "mmc/mathstep.hpp"
#include "mmc/ocr_document.hpp"
#include "mmc/report_json.hpp"
#include "mmc/script_format.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Everything thrown by the core is a std::exception; Python sees ValueError
// with the original message, except grading failures get their kind prefixed.
template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const mmc::grading::GradingError& e) {
    throw py::value_error(std::string(mmc::grading::to_string(e.kind())) + ": " + e.what());
  } catch (const std::exception& e) {
    throw py::value_error(e.what());
  }
}

mmc::layout::AnswerScript make_script(const std::string& problem, const std::vector<std::string>& steps) {
  return {problem, steps};
}

}  // namespace

PYBIND11_MODULE(_mmc, m) {
  m.doc() = "Arithmetic step checking, OCR reading order and answer-script grading";

  m.def("evaluate", [](const std::string& text) {
    return guarded([&] { return mmc::math::evaluate(*mmc::math::parse_expression(text)).to_string(); });
  }, py::arg("expression"));

  m.def("check_chain", [](const std::string& text) {
    return guarded([&] {
      const auto r = mmc::math::check_chain(mmc::math::parse_chain(text));
      json out{{"holds", r.holds()}, {"values", json::array()}};
      for (const auto& v : r.values) out["values"].push_back(v.to_string());
      if (r.first_failure) {
        out["equality_index"] = r.first_failure->equality_index;
        out["lhs"] = r.first_failure->lhs_value.to_string();
        out["rhs"] = r.first_failure->rhs_value.to_string();
      }
      return out.dump();
    });
  }, py::arg("text"));

  m.def("order_lines", [](const std::string& ocr_json) {
    return guarded([&] {
      const auto doc = mmc::layout::parse_ocr_document(ocr_json);
      return mmc::layout::order_lines(doc.lines, doc.page);
    });
  }, py::arg("ocr_json"));

  m.def("build_script", [](const std::string& ocr_json) {
    return guarded([&] {
      const auto doc = mmc::layout::parse_ocr_document(ocr_json);
      return mmc::layout::to_json(mmc::layout::build_script(doc.lines, doc.page)).dump();
    });
  }, py::arg("ocr_json"));

  m.def("parse_script_text", [](const std::string& text) {
    return guarded([&] { return mmc::layout::to_json(mmc::layout::parse_script_text(text)).dump(); });
  }, py::arg("text"));

  // LLM strategies run against the offline mock backend; there is no network
  // access from the module.
  m.def("grade", [](const std::string& problem, const std::vector<std::string>& steps, const std::string& strategy,
                    bool stop_at_first_mistake, int max_retries) {
    return guarded([&] {
      mmc::grading::StrategyConfig cfg;
      cfg.strategy_id = strategy;
      cfg.stop_at_first_mistake = stop_at_first_mistake;
      cfg.max_retries = max_retries;
      std::unique_ptr<mmc::backends::LlmBackend> llm;
      if (mmc::grading::is_llm_strategy(strategy)) {
        llm = std::make_unique<mmc::backends::OfflineMockLlm>();
        cfg.model_name = "offline-mock";
      }
      py::gil_scoped_release release;
      return mmc::grading::to_json(mmc::grading::grade(make_script(problem, steps), cfg, llm.get())).dump();
    });
  }, py::arg("problem"), py::arg("steps"), py::arg("strategy") = "oracle", py::arg("stop_at_first_mistake") = true,
     py::arg("max_retries") = 2);

  m.def("strategies", [] { return mmc::grading::strategy_ids(); });
}
