#ifndef AELOC_CSV_HPP
#define AELOC_CSV_HPP

#include <string>
#include <vector>

namespace aeloc {

// Minimal RFC-4180-style CSV: comma separated, CRLF-free (LF line ends),
// fields quoted only when they contain a comma, quote or newline.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& fields);
  void close();

 private:
  struct Impl;
  Impl* impl_;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path);

std::string csv_num(double v);       // shortest round-trip double
std::string csv_fixed(double v, int digits);

}  // namespace aeloc

#endif  // AELOC_CSV_HPP
