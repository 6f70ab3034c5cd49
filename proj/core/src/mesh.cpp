#include "degenctl/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace degenctl {

Grid build_grid(int n, int m, double T) {
    if (n < 3) throw std::invalid_argument("grid: n must be >= 3");
    if (m < 3) throw std::invalid_argument("grid: m must be >= 3");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("grid: T must be > 0");
    Grid g;
    g.n = n;
    g.m = m;
    g.T = T;
    g.h = 1.0 / (n + 1);
    g.dt = T / m;
    g.x_nodes.resize(static_cast<std::size_t>(n) + 2);
    for (int i = 0; i <= n + 1; ++i) g.x_nodes[static_cast<std::size_t>(i)] = i * g.h;
    g.x_nodes.back() = 1.0;
    g.t_nodes.resize(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) g.t_nodes[static_cast<std::size_t>(k)] = k * g.dt;
    g.t_nodes.back() = T;
    return g;
}

SpaceSlice& SpaceSlice::operator+=(const SpaceSlice& o) {
    if (o.size() != size()) throw std::invalid_argument("slice size mismatch");
    for (std::size_t j = 0; j < size(); ++j) values_[j] += o.values_[j];
    return *this;
}

SpaceSlice& SpaceSlice::operator-=(const SpaceSlice& o) {
    if (o.size() != size()) throw std::invalid_argument("slice size mismatch");
    for (std::size_t j = 0; j < size(); ++j) values_[j] -= o.values_[j];
    return *this;
}

SpaceSlice& SpaceSlice::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

SpaceSlice SpaceTimeField::slice(std::size_t k) const {
    auto r = row(k);
    return SpaceSlice(std::vector<double>(r.begin(), r.end()));
}

void SpaceTimeField::set_slice(std::size_t k, const SpaceSlice& s) {
    if (s.size() != cols_) throw std::invalid_argument("slice size mismatch");
    auto r = row(k);
    std::copy(s.span().begin(), s.span().end(), r.begin());
}

void require_conforming(const SpaceSlice& s, const Grid& g, const char* what) {
    if (s.size() != static_cast<std::size_t>(g.n))
        throw std::invalid_argument(std::string(what) + ": slice has " + std::to_string(s.size()) +
                                    " values, grid has n = " + std::to_string(g.n));
}

void require_conforming(const SpaceTimeField& f, const Grid& g, const char* what) {
    if (f.rows() != static_cast<std::size_t>(g.m) + 1 || f.cols() != static_cast<std::size_t>(g.n))
        throw std::invalid_argument(std::string(what) + ": field is " + std::to_string(f.rows()) +
                                    "x" + std::to_string(f.cols()) + ", grid expects " +
                                    std::to_string(g.m + 1) + "x" + std::to_string(g.n));
}

double slice_inner(const SpaceSlice& a, const SpaceSlice& b, const Grid& g) {
    require_conforming(a, g, "slice_inner");
    require_conforming(b, g, "slice_inner");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
    return g.h * sum;
}

double l2_norm(const SpaceSlice& slice, const Grid& g) {
    return std::sqrt(slice_inner(slice, slice, g));
}

double h1a_seminorm(const SpaceSlice& slice, const DiffusionProfile& profile, const Grid& g) {
    require_conforming(slice, g, "h1a_seminorm");
    const std::size_t n = slice.size();
    double sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double left = i == 0 ? 0.0 : slice[i - 1];
        const double right = i == n ? 0.0 : slice[i];
        const double a = profile(g.x(static_cast<int>(i)) + 0.5 * g.h);
        if (a == 0.0) continue;
        const double grad = (right - left) / g.h;
        sum += a * grad * grad;
    }
    return std::sqrt(g.h * sum);
}

std::vector<double> window_mask(const Grid& g, Interval window) {
    if (!window.well_formed()) throw std::invalid_argument("window must satisfy lo < hi");
    std::vector<double> mask(static_cast<std::size_t>(g.n), 0.0);
    for (std::size_t j = 0; j < mask.size(); ++j)
        if (window.contains(g.interior_x(j))) mask[j] = 1.0;
    return mask;
}

double spacetime_inner(const SpaceTimeField& a, const SpaceTimeField& b, const Grid& g,
                       std::optional<Interval> window, TimeRule rule) {
    require_conforming(a, g, "spacetime_inner");
    require_conforming(b, g, "spacetime_inner");
    const std::vector<double> mask =
        window ? window_mask(g, *window) : std::vector<double>(static_cast<std::size_t>(g.n), 1.0);

    const std::size_t m = static_cast<std::size_t>(g.m);
    std::size_t first = 0;
    std::size_t last = m;
    if (rule == TimeRule::interior) {
        first = 1;
        last = m - 1;
    } else if (rule == TimeRule::implicit_euler) {
        first = 1;
    }

    double total = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
        auto ra = a.row(k);
        auto rb = b.row(k);
        double level = 0.0;
        for (std::size_t j = 0; j < ra.size(); ++j) level += mask[j] * ra[j] * rb[j];
        const double w = (rule == TimeRule::trapezoidal && (k == 0 || k == m)) ? 0.5 : 1.0;
        total += w * level;
    }
    return g.h * g.dt * total;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_row(std::ostream& os, std::span<const double> values) {
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (j) os << ',';
        os << format_double(values[j]);
    }
    os << '\n';
}

void write_header(std::ostream& os, const Grid& g) {
    write_row(os, std::span<const double>(g.x_nodes).subspan(1, static_cast<std::size_t>(g.n)));
}

}  // namespace

void write_csv(std::ostream& os, const SpaceTimeField& f, const Grid& g) {
    require_conforming(f, g, "write_csv");
    write_header(os, g);
    for (std::size_t k = 0; k < f.rows(); ++k) write_row(os, f.row(k));
}

void write_csv(std::ostream& os, const SpaceSlice& s, const Grid& g) {
    require_conforming(s, g, "write_csv");
    write_header(os, g);
    write_row(os, s.span());
}

CsvTable read_csv(std::istream& is) {
    CsvTable table;
    std::string line;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos)
                    throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                            ": not a number: '" + cell + "'");
            }
        }
        if (first) {
            table.header = std::move(values);
            first = false;
        } else {
            if (values.size() != table.header.size())
                throw std::invalid_argument("csv: line " + std::to_string(line_no) + " has " +
                                            std::to_string(values.size()) + " columns, header has " +
                                            std::to_string(table.header.size()));
            table.rows.push_back(std::move(values));
        }
    }
    if (first) throw std::invalid_argument("csv: empty input");
    return table;
}

namespace {

void check_header(const CsvTable& table, const Grid& g) {
    if (table.header.size() != static_cast<std::size_t>(g.n))
        throw std::invalid_argument("csv: header has " + std::to_string(table.header.size()) +
                                    " positions, grid has n = " + std::to_string(g.n));
    for (std::size_t j = 0; j < table.header.size(); ++j)
        if (std::abs(table.header[j] - g.interior_x(j)) > 1e-9)
            throw std::invalid_argument("csv: header position " + std::to_string(j) +
                                        " does not match the grid");
}

}  // namespace

SpaceSlice slice_from_csv(const CsvTable& table, const Grid& g) {
    check_header(table, g);
    if (table.rows.size() != 1)
        throw std::invalid_argument("csv: a slice needs exactly one data row, got " +
                                    std::to_string(table.rows.size()));
    return SpaceSlice(table.rows.front());
}

SpaceTimeField field_from_csv(const CsvTable& table, const Grid& g) {
    check_header(table, g);
    if (table.rows.size() != static_cast<std::size_t>(g.m) + 1)
        throw std::invalid_argument("csv: field needs m+1 = " + std::to_string(g.m + 1) +
                                    " rows, got " + std::to_string(table.rows.size()));
    SpaceTimeField f = SpaceTimeField::zeros(g);
    for (std::size_t k = 0; k < f.rows(); ++k)
        std::copy(table.rows[k].begin(), table.rows[k].end(), f.row(k).begin());
    return f;
}

}  // namespace degenctl
