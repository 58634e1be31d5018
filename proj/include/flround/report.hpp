#pragma once

#include <string>
#include <vector>

namespace flround {

// Statistical checks pass when mean <= bound + kSigma * standard error.
struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

bool all_pass(const std::vector<Check>& checks);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string csv() const;
  // Columns padded to their widest cell, numbers right-aligned.
  std::string text() const;
};

std::string fmt(double v, int precision = 6);
std::string fmt_bool(bool v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace flround
