#pragma once

#include "degenctl/profile.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace degenctl {

/// Uniform mesh of Q = (0,1) x (0,T): n interior nodes x_i = i*h (i = 1..n,
/// with Dirichlet nodes x_0 = 0 and x_{n+1} = 1) and time levels t_k = k*dt.
struct Grid {
    int n = 0;
    int m = 0;
    double T = 0.0;
    double h = 0.0;
    double dt = 0.0;
    std::vector<double> x_nodes;  // n + 2 entries, boundary included
    std::vector<double> t_nodes;  // m + 1 entries

    /// Position of node i in 0..n+1.
    double x(int i) const { return x_nodes[static_cast<std::size_t>(i)]; }
    double t(int k) const { return t_nodes[static_cast<std::size_t>(k)]; }
    /// Position of the interior node stored at slice index j (0-based), i.e. x_{j+1}.
    double interior_x(std::size_t j) const { return x_nodes[j + 1]; }
};

Grid build_grid(int n, int m, double T);

/// Values at the interior nodes x_1..x_n; boundary values are implicitly zero.
class SpaceSlice {
public:
    SpaceSlice() = default;
    explicit SpaceSlice(std::size_t n, double fill = 0.0) : values_(n, fill) {}
    explicit SpaceSlice(std::vector<double> values) : values_(std::move(values)) {}

    static SpaceSlice zeros(const Grid& g) { return SpaceSlice(static_cast<std::size_t>(g.n)); }

    /// Samples fn at the interior nodes of g.
    template <typename Fn>
    static SpaceSlice sample(const Grid& g, Fn&& fn) {
        SpaceSlice s(static_cast<std::size_t>(g.n));
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = fn(g.interior_x(j));
        return s;
    }

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t j) { return values_[j]; }
    double operator[](std::size_t j) const { return values_[j]; }
    std::span<double> span() { return values_; }
    std::span<const double> span() const { return values_; }
    const std::vector<double>& values() const { return values_; }

    SpaceSlice& operator+=(const SpaceSlice& o);
    SpaceSlice& operator-=(const SpaceSlice& o);
    SpaceSlice& operator*=(double a);
    friend SpaceSlice operator+(SpaceSlice a, const SpaceSlice& b) { return a += b; }
    friend SpaceSlice operator-(SpaceSlice a, const SpaceSlice& b) { return a -= b; }
    friend SpaceSlice operator*(double a, SpaceSlice b) { return b *= a; }

    friend bool operator==(const SpaceSlice&, const SpaceSlice&) = default;

private:
    std::vector<double> values_;
};

/// (m+1) x n array over time levels 0..m and interior nodes, row-major.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static SpaceTimeField zeros(const Grid& g) {
        return SpaceTimeField(static_cast<std::size_t>(g.m) + 1, static_cast<std::size_t>(g.n));
    }

    /// Samples fn(x, t) at every interior node and time level of g.
    template <typename Fn>
    static SpaceTimeField sample(const Grid& g, Fn&& fn) {
        SpaceTimeField f = zeros(g);
        for (std::size_t k = 0; k < f.rows(); ++k)
            for (std::size_t j = 0; j < f.cols(); ++j)
                f(k, j) = fn(g.interior_x(j), g.t(static_cast<int>(k)));
        return f;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t k, std::size_t j) { return data_[k * cols_ + j]; }
    double operator()(std::size_t k, std::size_t j) const { return data_[k * cols_ + j]; }

    std::span<double> row(std::size_t k) { return {data_.data() + k * cols_, cols_}; }
    std::span<const double> row(std::size_t k) const { return {data_.data() + k * cols_, cols_}; }

    SpaceSlice slice(std::size_t k) const;
    void set_slice(std::size_t k, const SpaceSlice& s);

    std::span<const double> data() const { return data_; }

    friend bool operator==(const SpaceTimeField&, const SpaceTimeField&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

void require_conforming(const SpaceSlice& s, const Grid& g, const char* what);
void require_conforming(const SpaceTimeField& f, const Grid& g, const char* what);

/// Discrete L2(0,1) inner product h * sum u_i v_i.
double slice_inner(const SpaceSlice& a, const SpaceSlice& b, const Grid& g);
double l2_norm(const SpaceSlice& slice, const Grid& g);

/// sqrt(h * sum_{i=0..n} a(x_{i+1/2}) ((u_{i+1} - u_i)/h)^2) with a sampled at half nodes.
double h1a_seminorm(const SpaceSlice& slice, const DiffusionProfile& profile, const Grid& g);

/// Time quadrature used by spacetime_inner.
enum class TimeRule {
    trapezoidal,     ///< levels 0..m, half weight at the ends
    interior,        ///< levels 1..m-1 (integrands singular at t = 0, T)
    implicit_euler,  ///< levels 1..m, the rule the implicit Euler step pairs with
};

/// h * dt * sum over interior nodes (restricted to window when given) and the
/// time levels selected by rule.
double spacetime_inner(const SpaceTimeField& a, const SpaceTimeField& b, const Grid& g,
                       std::optional<Interval> window = std::nullopt,
                       TimeRule rule = TimeRule::trapezoidal);

/// 1 at interior nodes inside the open window, 0 elsewhere.
std::vector<double> window_mask(const Grid& g, Interval window);

/// CSV with a header row of interior x positions and one row per time level
/// (or a single row for a slice). Values are written with 17 significant digits.
void write_csv(std::ostream& os, const SpaceTimeField& f, const Grid& g);
void write_csv(std::ostream& os, const SpaceSlice& s, const Grid& g);

struct CsvTable {
    std::vector<double> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(std::istream& is);

/// Parses a CSV table into a slice (exactly one data row) or field (m+1 rows)
/// conforming to g; header positions must match the grid to 1e-9.
SpaceSlice slice_from_csv(const CsvTable& table, const Grid& g);
SpaceTimeField field_from_csv(const CsvTable& table, const Grid& g);

std::string format_double(double v);

}  // namespace degenctl
