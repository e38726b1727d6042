#include "wforget/report.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wforget/errors.hpp"
#include "wforget/serial.hpp"

namespace wforget::harness {

namespace {

using json = nlohmann::json;

std::string cell_text(const json& metrics, const char* key) {
  if (!metrics.contains(key)) return "n/a";
  const double mean = metrics[key]["accuracy_mean"].get<double>() * 100.0;
  const double std_dev = metrics[key]["accuracy_std"].get<double>() * 100.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f \xc2\xb1 %.2f", mean, std_dev);
  return buf;
}

std::string mia_text(const json& method) {
  if (!method.contains("mia")) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f \xc2\xb1 %.2f",
                method["mia"]["efficacy_mean"].get<double>() * 100.0,
                method["mia"]["efficacy_std"].get<double>() * 100.0);
  return buf;
}

// Rendered width: multi-byte UTF-8 sequences count as one column.
size_t display_width(const std::string& s) {
  size_t w = 0;
  for (const char c : s)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++w;
  return w;
}

}  // namespace

std::string report_table(const std::string& out_dir) {
  json agg;
  try {
    agg = json::parse(read_file(out_dir + "/aggregate.json"));
  } catch (const json::exception& e) {
    throw IoError(out_dir + "/aggregate.json: not a valid aggregate (" + e.what() + ")");
  }

  const std::vector<std::string> header = {"method",      "Train D_f",  "Train D_adj",
                                           "Train D_rem", "Test D_f",   "Test D_adj",
                                           "Test D_rem",  "MIA efficacy"};
  const char* cell_keys[6] = {"forget_train", "adjacent_train", "remote_train",
                              "forget_test",  "adjacent_test",  "remote_test"};

  std::vector<std::vector<std::string>> rows;
  for (const char* name : {"original", "wpgd", "pgd", "ga", "ft", "retrain"}) {
    if (!agg["methods"].contains(name)) continue;
    const json& m = agg["methods"][name];
    std::vector<std::string> row = {name};
    for (const char* key : cell_keys) row.push_back(cell_text(m["metrics"], key));
    row.push_back(mia_text(m));
    rows.push_back(std::move(row));
  }

  std::vector<size_t> widths(header.size());
  for (size_t c = 0; c < header.size(); ++c) {
    widths[c] = display_width(header[c]);
    for (const auto& row : rows) widths[c] = std::max(widths[c], display_width(row[c]));
  }

  std::string out;
  const auto emit_row = [&](const std::vector<std::string>& row) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += row[c];
      out.append(widths[c] - display_width(row[c]), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  };
  emit_row(header);
  {
    std::vector<std::string> rule;
    for (const size_t w : widths) rule.emplace_back(w, '-');
    emit_row(rule);
  }
  for (const auto& row : rows) emit_row(row);
  return out;
}

}  // namespace wforget::harness
