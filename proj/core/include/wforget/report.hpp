#pragma once

#include <string>

namespace wforget::harness {

// Renders the cross-seed aggregate of a finished experiment directory as a
// fixed-width text table: one row per method, accuracy (mean +- population
// std over seeds, in percent) for the three train subsets, then the three
// test subsets, then membership-inference efficacy. Cells for empty subsets
// print "n/a". Throws IoError when the directory holds no readable aggregate.
std::string report_table(const std::string& out_dir);

}  // namespace wforget::harness
