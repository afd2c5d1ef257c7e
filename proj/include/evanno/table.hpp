#pragma once

#include <string>
#include <vector>

namespace evanno {

// Plain-text table with a header row and rule lines. The first column is
// left-aligned, the rest right-aligned.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> headers) : headers_(std::move(headers)) {}

  void add_row(std::vector<std::string> cells);
  // Inserts a rule line before the next row.
  void add_rule();

  std::string render() const;

  const std::vector<std::string>& headers() const noexcept { return headers_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> rules_;  // row indices preceded by a rule
};

// Fixed-point formatting, e.g. format_fixed(0.6667, 2) == "0.67".
std::string format_fixed(double value, int decimals);

}  // namespace evanno
