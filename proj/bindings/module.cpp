#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <utility>
#include <vector>

#include "epitext/drug_match.hpp"
#include "epitext/llm_extract.hpp"
#include "epitext/metrics.hpp"
#include "epitext/rule_extract.hpp"
#include "epitext/textproc.hpp"
#include "epitext/utf8.hpp"

namespace py = pybind11;

using namespace epitext;

namespace {

std::optional<std::pair<int, int>> age_to_pair(const std::optional<AgeValue>& age) {
  if (!age) return std::nullopt;
  return std::make_pair(age->years, age->months);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core operations of the epitext clinical text extraction toolkit";
  m.attr("__version__") = "0.1.0";

  py::class_<textproc::Token>(m, "Token")
      .def_readonly("surface", &textproc::Token::surface)
      .def_readonly("normalized", &textproc::Token::normalized)
      .def_readonly("offset", &textproc::Token::offset)
      .def("__repr__", [](const textproc::Token& t) {
        return "Token('" + t.normalized + "', offset=" + std::to_string(t.offset) + ")";
      });

  py::class_<textproc::Sentence>(m, "Sentence")
      .def_readonly("tokens", &textproc::Sentence::tokens)
      .def_readonly("begin", &textproc::Sentence::begin)
      .def_readonly("end", &textproc::Sentence::end);

  m.def("normalize_token", &textproc::normalize_token, py::arg("surface"),
        "Unicode lowercase + strip leading/trailing punctuation; idempotent.");
  m.def("fold_ascii", py::overload_cast<std::string_view>(&utf8::fold_ascii), py::arg("text"),
        "Best-effort diacritic folding after lowering.");
  m.def("tokenize", &textproc::tokenize, py::arg("text"), py::arg("base_offset") = 0);
  m.def(
      "split_sentences",
      [](std::string_view text, std::optional<std::vector<std::string>> abbreviations) {
        const textproc::SentenceSplitter splitter =
            abbreviations ? textproc::SentenceSplitter(*abbreviations) : textproc::SentenceSplitter();
        return splitter.split(text);
      },
      py::arg("text"), py::arg("abbreviations") = std::nullopt);

  m.def(
      "parse_age_text",
      [](std::string_view text, int max_years) {
        return age_to_pair(rules::parse_age_text(text, rules::AgeGrammar{max_years}));
      },
      py::arg("text"), py::arg("max_years") = 18,
      "Returns (years, months) for the first age expression, or None.");
  m.def(
      "parse_age_tokens",
      [](const std::vector<std::string>& tokens, int max_years) {
        std::vector<textproc::Token> toks;
        toks.reserve(tokens.size());
        for (const auto& t : tokens) toks.push_back({t, textproc::normalize_token(t), 0});
        return age_to_pair(rules::parse_age_expression(toks, rules::AgeGrammar{max_years}));
      },
      py::arg("tokens"), py::arg("max_years") = 18);
  m.def(
      "round_age_years",
      [](int years, int months) { return metrics::round_age_years(AgeValue{years, months}); },
      py::arg("years"), py::arg("months"));

  m.def("indel_ratio", &drugs::indel_ratio, py::arg("a"), py::arg("b"));
  m.def("token_set_ratio", &drugs::token_set_ratio, py::arg("a"), py::arg("b"));

  m.def(
      "adjusted_accuracy",
      [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>& instances,
         bool literal) {
        std::vector<metrics::DrugEvalInstance> evals;
        evals.reserve(instances.size());
        for (const auto& [gold, predicted] : instances) {
          evals.push_back(metrics::DrugEvalInstance::make(gold, predicted));
        }
        return metrics::adjusted_accuracy(evals, literal
                                                     ? metrics::AdjustedAccuracyMode::LiteralSum
                                                     : metrics::AdjustedAccuracyMode::PerRecordMean);
      },
      py::arg("instances"), py::arg("literal") = false,
      "instances: list of (gold_names, predicted_names) pairs.");

  m.def(
      "parse_llm_output",
      [](std::string_view response, const std::vector<std::string>& keys) {
        const auto parsed = llm::parse_llm_output(response, keys);
        py::dict values;
        for (const auto& [key, value] : parsed.values) {
          values[py::str(key)] = value ? py::object(py::str(*value)) : py::none();
        }
        py::dict out;
        out["status"] = llm::to_string(parsed.status);
        out["values"] = values;
        return out;
      },
      py::arg("response"), py::arg("keys"));
  m.def(
      "render_kv_block",
      [](const std::vector<std::pair<std::string, std::optional<std::string>>>& values,
         bool ascii_brackets) { return llm::render_kv_block(values, ascii_brackets); },
      py::arg("values"), py::arg("ascii_brackets") = false);
}
