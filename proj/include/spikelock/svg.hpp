#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace spikelock::svg {

// Fixed-style illustrative plots; quantitative claims belong to the CSV
// outputs, these exist so a run can be eyeballed without external tooling.

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

void write_lines(std::ostream& out, const std::vector<Series>& series,
                 const std::string& title, const std::string& x_label,
                 const std::string& y_label);

// One row per trial, a tick per event.
void write_raster(std::ostream& out, const std::vector<std::pair<int, double>>& rows,
                  int n_trials, double t_end, const std::string& title);

} // namespace spikelock::svg
