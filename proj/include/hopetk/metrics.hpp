#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopetk/labels.hpp"

namespace hopetk {

// Rows = true class, columns = predicted class, fixed order [HS, NHS, NIL].
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> cells{};

  std::int64_t at(Label truth, Label predicted) const {
    return cells[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::int64_t total() const;
  std::int64_t trace() const;
};

ConfusionMatrix confusion_matrix(const std::vector<Label>& y_true,
                                 const std::vector<Label>& y_pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct EvaluationReport {
  std::array<ClassMetrics, kNumClasses> per_class;
  double accuracy = 0.0;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  // Classes whose precision or recall hit the zero-division convention.
  std::vector<Label> zero_division_warnings;
};

// precision_k = diag/colsum, recall_k = diag/rowsum, both 0 on empty
// denominators (recorded in the warnings field); weighted aggregates are
// support-weighted.
EvaluationReport classification_report(const ConfusionMatrix& matrix);

std::string format_report_text(const EvaluationReport& report);
std::string report_to_csv(const EvaluationReport& report);
nlohmann::json report_to_json(const EvaluationReport& report);

std::string format_confusion_text(const ConfusionMatrix& matrix);
// row,col,count triples for external heat-map plotting.
std::string confusion_to_csv(const ConfusionMatrix& matrix);
nlohmann::json confusion_to_json(const ConfusionMatrix& matrix);

struct NamedReport {
  std::string name;
  EvaluationReport report;
};

struct ComparisonTable {
  std::vector<NamedReport> rows;
  std::size_t best_index = 0;  // highest weighted F1
};

ComparisonTable compare_report(std::vector<NamedReport> reports);

std::string format_comparison_text(const ComparisonTable& table);
std::string comparison_to_csv(const ComparisonTable& table);
nlohmann::json comparison_to_json(const ComparisonTable& table);

}  // namespace hopetk
