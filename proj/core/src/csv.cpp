#include "aeloc/csv.hpp"

#include <cstdio>
#include <fstream>

#include "aeloc/errors.hpp"

namespace aeloc {

struct CsvWriter::Impl {
  std::ofstream os;
};

CsvWriter::CsvWriter(const std::string& path) : impl_(new Impl) {
  impl_->os.open(path, std::ios::binary);
  if (!impl_->os) {
    delete impl_;
    throw InputError("cannot open csv for writing: " + path);
  }
}

CsvWriter::~CsvWriter() { delete impl_; }

namespace {

bool needs_quotes(const std::string& f) {
  return f.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& f) {
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) impl_->os << ',';
    impl_->os << (needs_quotes(fields[i]) ? quoted(fields[i]) : fields[i]);
  }
  impl_->os << '\n';
}

void CsvWriter::close() {
  impl_->os.close();
  if (impl_->os.fail()) throw InputError("failed writing csv");
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open csv: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          cur += c;
        }
      } else if (c == '"') {
        in_quotes = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(cur);
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace aeloc
