#pragma once

// CSV tables and JSON records for the command-line front end.

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "momentum.hpp"

namespace snakewalk {

using json = nlohmann::ordered_json;

/// Fixed-format numbers so that identical runs give identical bytes.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row(std::initializer_list<double> values) {
        detail::require(values.size() == header_.size(), "csv row width does not match header");
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(format_number(v));
        rows_.push_back(std::move(cells));
        return *this;
    }
    CsvTable& row(const std::vector<double>& values) {
        detail::require(values.size() == header_.size(), "csv row width does not match header");
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(format_number(v));
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

    std::string str() const {
        std::ostringstream out;
        write_line(out, header_);
        for (const auto& r : rows_) write_line(out, r);
        return out.str();
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot open " + path + " for writing");
        f << str();
    }

private:
    static void write_line(std::ostream& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// {"n", "x_min", "x_max", "amplitudes": [[re, im], ...]} in (x, j) order.
inline json to_json(const ColumnState& s) {
    json amps = json::array();
    for (Eigen::Index i = 0; i < s.amplitudes.size(); ++i)
        amps.push_back({s.amplitudes[i].real(), s.amplitudes[i].imag()});
    return {{"n", s.n}, {"x_min", s.x_min}, {"x_max", s.x_max}, {"amplitudes", std::move(amps)}};
}

inline ColumnState column_state_from_json(const json& j) {
    ColumnState s = ColumnState::zeros(j.at("n").get<int>(), j.at("x_min").get<std::int64_t>(),
                                       j.at("x_max").get<std::int64_t>());
    const auto& amps = j.at("amplitudes");
    detail::require(static_cast<Eigen::Index>(amps.size()) == s.amplitudes.size(), "column state size mismatch");
    for (std::size_t i = 0; i < amps.size(); ++i)
        s.amplitudes[static_cast<Eigen::Index>(i)] = cplx(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
    return s;
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
}

}  // namespace snakewalk
