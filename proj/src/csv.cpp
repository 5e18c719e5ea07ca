#include "spikelock/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace spikelock::csv {

std::string format(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
    const std::size_t m = traj.dim - 2;
    out << "t,s";
    for (std::size_t j = 1; j <= m; ++j)
        out << ",x" << j;
    out << ",v\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format(traj.times[i]);
        const double* row = traj.row(i);
        for (std::size_t j = 0; j < traj.dim; ++j)
            out << ',' << format(row[j]);
        out << '\n';
    }
}

void write_impulses(std::ostream& out, const Trajectory& traj) {
    out << "t_impulse,s_minus,s_plus\n";
    for (const ImpulseRecord& rec : traj.impulse_records)
        out << format(rec.t) << ',' << format(rec.s_minus) << ',' << format(rec.s_plus)
            << '\n';
}

void write_events(std::ostream& out, const EventSet& events) {
    out << "event_time,window_start,window_end\n";
    for (const Event& e : events.events)
        out << format(e.time) << ',' << format(e.window_start) << ','
            << format(e.window_end) << '\n';
}

void write_raster(std::ostream& out, const std::vector<std::pair<int, double>>& rows) {
    out << "trial_id,event_time\n";
    for (const auto& [trial, time] : rows)
        out << trial << ',' << format(time) << '\n';
}

void write_divergence(std::ostream& out, const DivergenceStudy& study) {
    out << "t,pair_id,d\n";
    for (std::size_t p = 0; p < study.d.size(); ++p)
        for (std::size_t i = 0; i < study.times.size(); ++i)
            out << format(study.times[i]) << ',' << p << ',' << format(study.d[p][i])
                << '\n';
}

void write_train(std::ostream& out, const ImpulseTrain& train) {
    for (double t : train.times())
        out << format(t) << '\n';
}

namespace {

double parse_double(const std::string& field, std::size_t line_no) {
    double x = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::runtime_error("csv: malformed number '" + field + "' on line " +
                                 std::to_string(line_no));
    return x;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// strips a trailing carriage return so files written on other platforms parse
std::string chomp(std::string line) {
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    return line;
}

} // namespace

std::vector<std::vector<double>> read_table(std::istream& in, const std::string& header) {
    std::string line;
    if (!std::getline(in, line) || chomp(line) != header)
        throw std::runtime_error("csv: expected header '" + header + "'");
    const std::size_t n_cols = split_fields(header).size();

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty())
            continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != n_cols)
            throw std::runtime_error("csv: expected " + std::to_string(n_cols) +
                                     " fields on line " + std::to_string(line_no) +
                                     ", got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(n_cols);
        for (const std::string& f : fields)
            row.push_back(parse_double(f, line_no));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::pair<int, double>> read_raster(std::istream& in) {
    const auto table = read_table(in, "trial_id,event_time");
    std::vector<std::pair<int, double>> rows;
    rows.reserve(table.size());
    for (const auto& row : table)
        rows.emplace_back(static_cast<int>(row[0]), row[1]);
    return rows;
}

ImpulseTrain read_train(std::istream& in) {
    std::vector<double> times;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty())
            continue;
        times.push_back(parse_double(line, line_no));
    }
    return ImpulseTrain(times);
}

} // namespace spikelock::csv
