#ifndef UNIREGRET_IO_HPP
#define UNIREGRET_IO_HPP

#include <string>
#include <string_view>
#include <vector>

#include "uniregret/adversary.hpp"
#include "uniregret/batch.hpp"
#include "uniregret/sequence.hpp"

namespace uniregret {

/// Locale-independent, fixed-precision rendering used in every CSV.
std::string format_real(double v);

/**
 * Sequence file: one real per line, optional first line "# A=<bound>".
 * Blank lines are ignored. Without a header the bound is max|x[t]|.
 */
SequenceD parse_sequence(std::string_view text, const std::string& source_name = "<input>");
SequenceD read_sequence_file(const std::string& path);
std::string format_sequence(const SequenceD& seq);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

inline constexpr const char* kRegretCsvHeader =
    "n,m,class,delta,seq_loss,batch_ridge,batch_raw,regret,det_bound,simple_bound";

/// One row matching kRegretCsvHeader (no trailing newline).
std::string regret_csv_row(const RegretReport<double>& report);

/// Header + rows + footer "slope_fit,<slope>,,".
std::string lower_bound_csv(const LowerBoundTable& table);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace uniregret

#endif  // UNIREGRET_IO_HPP
