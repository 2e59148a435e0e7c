#include "hopetk/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hopetk {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (const auto& row : cells) {
    for (std::int64_t cell : row) sum += cell;
  }
  return sum;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) sum += cells[k][k];
  return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<Label>& y_true,
                                 const std::vector<Label>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion_matrix: label lists differ in length");
  }
  if (y_true.empty()) {
    throw std::invalid_argument("confusion_matrix: empty label lists");
  }
  ConfusionMatrix matrix;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    matrix.cells[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])]++;
  }
  return matrix;
}

EvaluationReport classification_report(const ConfusionMatrix& matrix) {
  const std::int64_t total = matrix.total();
  if (total == 0) throw std::invalid_argument("classification_report: empty matrix");

  EvaluationReport report;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    std::int64_t rowsum = 0, colsum = 0;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      rowsum += matrix.cells[k][j];
      colsum += matrix.cells[j][k];
    }
    const auto diag = static_cast<double>(matrix.cells[k][k]);
    ClassMetrics& m = report.per_class[k];
    m.support = rowsum;

    bool warned = false;
    if (colsum == 0) {
      m.precision = 0.0;
      warned = true;
    } else {
      m.precision = diag / static_cast<double>(colsum);
    }
    if (rowsum == 0) {
      m.recall = 0.0;
      warned = true;
    } else {
      m.recall = diag / static_cast<double>(rowsum);
    }
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    if (warned) report.zero_division_warnings.push_back(kClassOrder[k]);
  }

  report.accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(total);
  double support_sum = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& m = report.per_class[k];
    report.macro_precision += m.precision / kNumClasses;
    report.macro_recall += m.recall / kNumClasses;
    report.macro_f1 += m.f1 / kNumClasses;
    const auto w = static_cast<double>(m.support);
    report.weighted_precision += w * m.precision;
    report.weighted_recall += w * m.recall;
    report.weighted_f1 += w * m.f1;
    support_sum += w;
  }
  report.weighted_precision /= support_sum;
  report.weighted_recall /= support_sum;
  report.weighted_f1 /= support_sum;
  return report;
}

std::string format_report_text(const EvaluationReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s %10s\n", "class", "precision", "recall",
                "f1", "support");
  out << line;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& m = report.per_class[k];
    std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f %10lld\n",
                  std::string(to_string(kClassOrder[k])).c_str(), m.precision, m.recall, m.f1,
                  static_cast<long long>(m.support));
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f\n", "macro",
                report.macro_precision, report.macro_recall, report.macro_f1);
  out << line;
  std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f\n", "weighted",
                report.weighted_precision, report.weighted_recall, report.weighted_f1);
  out << line;
  std::snprintf(line, sizeof(line), "%-10s %10.4f\n", "accuracy", report.accuracy);
  out << line;
  if (!report.zero_division_warnings.empty()) {
    out << "warning: zero-division classes reported as 0:";
    for (Label label : report.zero_division_warnings) out << " " << to_string(label);
    out << "\n";
  }
  return out.str();
}

std::string report_to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "class,precision,recall,f1,support\n";
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& m = report.per_class[k];
    out << to_string(kClassOrder[k]) << ',' << m.precision << ',' << m.recall << ',' << m.f1
        << ',' << m.support << '\n';
  }
  out << "macro," << report.macro_precision << ',' << report.macro_recall << ','
      << report.macro_f1 << ",\n";
  out << "weighted," << report.weighted_precision << ',' << report.weighted_recall << ','
      << report.weighted_f1 << ",\n";
  return out.str();
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassMetrics& m = report.per_class[k];
    per_class[std::string(to_string(kClassOrder[k]))] = {{"precision", m.precision},
                                                         {"recall", m.recall},
                                                         {"f1", m.f1},
                                                         {"support", m.support}};
  }
  nlohmann::json warnings = nlohmann::json::array();
  for (Label label : report.zero_division_warnings) {
    warnings.push_back(std::string(to_string(label)));
  }
  return nlohmann::json{{"per_class", per_class},
                        {"accuracy", report.accuracy},
                        {"macro", {{"precision", report.macro_precision},
                                   {"recall", report.macro_recall},
                                   {"f1", report.macro_f1}}},
                        {"weighted", {{"precision", report.weighted_precision},
                                      {"recall", report.weighted_recall},
                                      {"f1", report.weighted_f1}}},
                        {"zero_division_warnings", warnings}};
}

std::string format_confusion_text(const ConfusionMatrix& matrix) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s\n", "true\\pred", "HS", "NHS", "NIL");
  out << line;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    std::snprintf(line, sizeof(line), "%-12s %8lld %8lld %8lld\n",
                  std::string(to_string(kClassOrder[i])).c_str(),
                  static_cast<long long>(matrix.cells[i][0]),
                  static_cast<long long>(matrix.cells[i][1]),
                  static_cast<long long>(matrix.cells[i][2]));
    out << line;
  }
  return out.str();
}

std::string confusion_to_csv(const ConfusionMatrix& matrix) {
  std::ostringstream out;
  out << "true,predicted,count\n";
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      out << to_string(kClassOrder[i]) << ',' << to_string(kClassOrder[j]) << ','
          << matrix.cells[i][j] << '\n';
    }
  }
  return out.str();
}

nlohmann::json confusion_to_json(const ConfusionMatrix& matrix) {
  nlohmann::json rows = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    nlohmann::json cols = nlohmann::json::object();
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      cols[std::string(to_string(kClassOrder[j]))] = matrix.cells[i][j];
    }
    rows[std::string(to_string(kClassOrder[i]))] = cols;
  }
  return rows;
}

ComparisonTable compare_report(std::vector<NamedReport> reports) {
  if (reports.empty()) throw std::invalid_argument("compare_report: no reports");
  ComparisonTable table;
  table.rows = std::move(reports);
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i].report.weighted_f1 > table.rows[table.best_index].report.weighted_f1) {
      table.best_index = i;
    }
  }
  return table;
}

std::string format_comparison_text(const ComparisonTable& table) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof(line), "%-20s %10s %10s %12s %6s\n", "model", "precision", "recall",
                "weighted_f1", "best");
  out << line;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const NamedReport& row = table.rows[i];
    std::snprintf(line, sizeof(line), "%-20s %10.4f %10.4f %12.4f %6s\n", row.name.c_str(),
                  row.report.weighted_precision, row.report.weighted_recall,
                  row.report.weighted_f1, i == table.best_index ? "*" : "");
    out << line;
  }
  return out.str();
}

std::string comparison_to_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "model,precision,recall,weighted_f1,best\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const NamedReport& row = table.rows[i];
    out << row.name << ',' << row.report.weighted_precision << ','
        << row.report.weighted_recall << ',' << row.report.weighted_f1 << ','
        << (i == table.best_index ? 1 : 0) << '\n';
  }
  return out.str();
}

nlohmann::json comparison_to_json(const ComparisonTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const NamedReport& row = table.rows[i];
    rows.push_back({{"model", row.name},
                    {"precision", row.report.weighted_precision},
                    {"recall", row.report.weighted_recall},
                    {"weighted_f1", row.report.weighted_f1},
                    {"best", i == table.best_index}});
  }
  return rows;
}

}  // namespace hopetk
