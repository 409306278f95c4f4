#include "plotline/eval.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plotline/text_util.hpp"

namespace plotline::eval {

namespace {

BoundaryReference reference_from_json(const nlohmann::json& j) {
  BoundaryReference ref;
  ref.book_id = j.at("book_id").get<std::string>();
  std::set<int> unique;
  for (const auto& b : j.at("boundaries")) unique.insert(b.get<int>());
  ref.boundaries.assign(unique.begin(), unique.end());
  return ref;
}

}  // namespace

std::vector<BoundaryReference> load_references(const std::string& path) {
  const std::string content = text::read_file(path);
  std::vector<BoundaryReference> out;
  try {
    const auto j = nlohmann::json::parse(content);
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(reference_from_json(item));
    } else {
      out.push_back(reference_from_json(j));
    }
    return out;
  } catch (const nlohmann::json::parse_error&) {
    // fall through to one object per line
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("reference file: ") + e.what());
  }
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(reference_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("reference file: ") + e.what());
    }
  }
  return out;
}

double harmonic_f1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

BoundaryScores boundary_prf(std::vector<int> pred, std::vector<int> gold, int window) {
  std::sort(pred.begin(), pred.end());
  pred.erase(std::unique(pred.begin(), pred.end()), pred.end());
  std::sort(gold.begin(), gold.end());
  gold.erase(std::unique(gold.begin(), gold.end()), gold.end());

  BoundaryScores s;
  if (pred.empty() && gold.empty()) {
    s.precision = s.recall = s.f1 = s.accuracy = 1.0;
    return s;
  }
  std::set<int> open(gold.begin(), gold.end());
  for (int p : pred) {
    auto it = open.lower_bound(p - window);
    if (it != open.end() && *it <= p + window) {
      open.erase(it);
      ++s.matches;
    }
  }
  const double m = s.matches;
  s.precision = pred.empty() ? 0.0 : m / static_cast<double>(pred.size());
  s.recall = gold.empty() ? 0.0 : m / static_cast<double>(gold.size());
  s.f1 = harmonic_f1(s.precision, s.recall);
  s.accuracy = m / static_cast<double>(std::max(pred.size(), gold.size()));
  return s;
}

std::int64_t count_inversions(std::vector<int> sequence) {
  std::vector<int> buffer(sequence.size());
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < sequence.size(); width *= 2) {
    for (std::size_t lo = 0; lo < sequence.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, sequence.size());
      const std::size_t hi = std::min(lo + 2 * width, sequence.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (sequence[j] < sequence[i]) {
          inversions += static_cast<std::int64_t>(mid - i);
          buffer[k++] = sequence[j++];
        } else {
          buffer[k++] = sequence[i++];
        }
      }
      while (i < mid) buffer[k++] = sequence[i++];
      while (j < hi) buffer[k++] = sequence[j++];
    }
    sequence.swap(buffer);
  }
  return inversions;
}

BookMetrics MetricReport::macro() const {
  BookMetrics m;
  m.book_id = "macro";
  if (books.empty()) {
    m.tau = 0.0;
    return m;
  }
  const double n = static_cast<double>(books.size());
  m.tau = 0.0;
  for (const auto& b : books) {
    m.scores.precision += b.scores.precision / n;
    m.scores.recall += b.scores.recall / n;
    m.scores.f1 += b.scores.f1 / n;
    m.scores.accuracy += b.scores.accuracy / n;
    m.tau += b.tau / n;
  }
  return m;
}

std::string report_csv(const MetricReport& report) {
  std::string out = "book_id,precision,recall,f1,accuracy,tau\n";
  for (const auto& b : report.books) {
    out += b.book_id + "," + text::format_double(b.scores.precision) + "," + text::format_double(b.scores.recall) + "," +
           text::format_double(b.scores.f1) + "," + text::format_double(b.scores.accuracy) + "," +
           text::format_double(b.tau) + "\n";
  }
  return out;
}

std::string report_table(const MetricReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %9s %9s %9s %9s %9s\n", "book", "precision", "recall", "f1", "accuracy",
                "tau");
  out << "boundary tolerance: +/-" << report.window << " chapter(s)\n" << line;
  auto row = [&](const BookMetrics& b) {
    std::snprintf(line, sizeof(line), "%-24s %9.4f %9.4f %9.4f %9.4f %9.4f\n", b.book_id.c_str(), b.scores.precision,
                  b.scores.recall, b.scores.f1, b.scores.accuracy, b.tau);
    out << line;
  };
  for (const auto& b : report.books) row(b);
  if (!report.books.empty()) row(report.macro());
  return out.str();
}

void emit_report(const MetricReport& report, const std::string& csv_path, const std::string& table_path) {
  text::write_file(csv_path, report_csv(report));
  text::write_file(table_path, report_table(report));
}

}  // namespace plotline::eval
