#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spikelock/contraction.hpp"
#include "spikelock/detector.hpp"
#include "spikelock/integrate.hpp"
#include "spikelock/synapse.hpp"

namespace spikelock::csv {

// Shortest decimal form that parses back to the identical double
// (std::to_chars), so emitted files are byte-deterministic across runs.
std::string format(double x);

void write_trajectory(std::ostream& out, const Trajectory& traj); // t,s,x1..xm,v
void write_impulses(std::ostream& out, const Trajectory& traj);   // t_impulse,s_minus,s_plus
void write_events(std::ostream& out, const EventSet& events);     // event_time,window_start,window_end
void write_raster(std::ostream& out,
                  const std::vector<std::pair<int, double>>& rows); // trial_id,event_time
void write_divergence(std::ostream& out, const DivergenceStudy& study); // t,pair_id,d
void write_train(std::ostream& out, const ImpulseTrain& train); // one time per line, no header

// Readers for the formats above (round-trip checks and the rerun path).
// Every reader validates the expected header and throws std::runtime_error
// with a line number on malformed input.
std::vector<std::vector<double>> read_table(std::istream& in, const std::string& header);
std::vector<std::pair<int, double>> read_raster(std::istream& in);
ImpulseTrain read_train(std::istream& in);

} // namespace spikelock::csv
