#include "uniregret/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace uniregret {

std::string format_real(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

SequenceD parse_sequence(std::string_view text, const std::string& source_name) {
  std::vector<double> values;
  double bound = 0.0;
  bool has_bound = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      if (body.substr(0, 2) != "A=" || has_bound || !values.empty()) {
        throw ParseError(source_name + ":" + std::to_string(line_no) +
                         ": only a leading '# A=<bound>' header is allowed");
      }
      if (!parse_double(trim(body.substr(2)), bound) || !(bound > 0.0)) {
        throw ParseError(source_name + ":" + std::to_string(line_no) + ": bad bound in header");
      }
      has_bound = true;
      continue;
    }
    double v = 0.0;
    if (!parse_double(line, v)) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": not a real number: '" +
                       std::string(line) + "'");
    }
    if (has_bound && std::abs(v) > bound) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": |x| exceeds bound A=" +
                       format_real(bound));
    }
    values.push_back(v);
  }
  if (values.empty()) throw ParseError(source_name + ": no samples");
  return has_bound ? SequenceD(std::move(values), bound)
                   : SequenceD::with_tight_bound(std::move(values));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

SequenceD read_sequence_file(const std::string& path) {
  return parse_sequence(read_text_file(path), path);
}

std::string format_sequence(const SequenceD& seq) {
  std::string out = "# A=" + format_real(seq.bound()) + "\n";
  for (const double v : seq.values()) out += format_real(v) + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << content;
  if (!out) throw IoError("error writing '" + path + "'");
}

std::string regret_csv_row(const RegretReport<double>& r) {
  std::string row;
  row += std::to_string(r.n) + ",";
  row += std::to_string(r.m) + ",";
  row += std::string(class_name(r.kind)) + ",";
  row += format_real(r.delta) + ",";
  row += format_real(r.sequential_loss) + ",";
  row += format_real(r.batch_loss_ridge) + ",";
  row += format_real(r.batch_loss_unregularized) + ",";
  row += format_real(r.regret_vs_unregularized) + ",";
  row += format_real(r.det_bound) + ",";
  row += format_real(r.simple_bound);
  return row;
}

std::string lower_bound_csv(const LowerBoundTable& table) {
  std::string out = "n,mean_regret,std_error,trials\n";
  for (const auto& row : table.rows) {
    out += std::to_string(row.n) + "," + format_real(row.mean_regret) + "," +
           format_real(row.std_error) + "," + std::to_string(row.trials) + "\n";
  }
  out += "slope_fit," + format_real(table.fitted_slope_vs_ln_n) + ",,\n";
  return out;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
  constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    for (const double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (width - left - right); };
  auto py = [&](double v) { return height - bottom - (v - ymin) / (ymax - ymin) * (height - top - bottom); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape_xml(title) + "</text>\n";
  out += "<line x1=\"70\" y1=\"350\" x2=\"620\" y2=\"350\" stroke=\"black\"/>\n";
  out += "<line x1=\"70\" y1=\"40\" x2=\"70\" y2=\"350\" stroke=\"black\"/>\n";
  out += "<text x=\"345\" y=\"385\" text-anchor=\"middle\" font-size=\"12\">" + escape_xml(x_label) +
         " [" + format_real(xmin) + ", " + format_real(xmax) + "]</text>\n";
  out += "<text x=\"16\" y=\"195\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 195)\">" +
         escape_xml(y_label) + " [" + format_real(ymin) + ", " + format_real(ymax) + "]</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = colors[i % 4];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    const std::size_t count = std::min(s.x.size(), s.y.size());
    for (std::size_t j = 0; j < count; ++j) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[j]), py(s.y[j]));
      out += buf;
    }
    out += "\"/>\n";
    out += "<text x=\"80\" y=\"" + std::to_string(58 + 16 * i) + "\" font-size=\"12\" fill=\"" + color +
           "\">" + escape_xml(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace uniregret
