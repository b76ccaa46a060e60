// Test-only oracle: solves the same nodal equations as the sweep solver
// by dense fixed-point iteration on the full admittance matrix. Kept
// independent of the sweep implementation on purpose.
#ifndef EVSIM_TESTS_REFERENCE_SOLVE_HPP
#define EVSIM_TESTS_REFERENCE_SOLVE_HPP

#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "evsim/load_model.hpp"
#include "evsim/network.hpp"
#include "evsim/powerflow.hpp"

namespace evsim_test {

using cplx = std::complex<double>;

// Gaussian elimination with partial pivoting, in place.
inline std::vector<cplx> solve_linear(std::vector<std::vector<cplx>> a, std::vector<cplx> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-14) throw std::runtime_error("singular admittance matrix");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            cplx f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t row = n; row-- > 0;) {
        cplx s = b[row];
        for (std::size_t c = row + 1; c < n; ++c) s -= a[row][c] * x[c];
        x[row] = s / a[row][row];
    }
    return x;
}

// Per-bus voltage magnitudes (pu) keyed by bus id. Buses joined by
// zero-impedance lines are collapsed into one electrical node so the
// admittance matrix stays finite.
inline std::map<std::string, cplx> reference_solve(const evsim::Network& network,
                                                   const evsim::LoadSnapshot& snapshot,
                                                   double source_v_pu = 1.0,
                                                   int max_iterations = 2000,
                                                   double tol = 1e-13) {
    const std::size_t nb = network.buses.size();
    if (nb > 10) throw std::invalid_argument("reference solver is for networks of <= 10 buses");

    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < nb; ++i) idx[network.buses[i].id] = i;

    // union-find over zero-impedance lines
    std::vector<std::size_t> root(nb);
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](std::size_t i) {
        while (root[i] != i) i = root[i] = root[root[i]];
        return i;
    };
    for (const auto& l : network.lines) {
        if (l.r_ohm() == 0.0 && l.x_ohm() == 0.0)
            root[find(idx[l.from_bus])] = find(idx[l.to_bus]);
    }
    std::map<std::size_t, std::size_t> node_of_root;
    std::vector<std::size_t> node(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        std::size_t r = find(i);
        node[i] = node_of_root.try_emplace(r, node_of_root.size()).first->second;
    }
    const std::size_t nn = node_of_root.size();
    std::size_t source_node = node[idx[network.source_bus]];

    double z_base = network.voltage.v_ll_kv * network.voltage.v_ll_kv /
                    (evsim::kBasePowerKva / 1000.0);
    std::vector<std::vector<cplx>> y(nn, std::vector<cplx>(nn, cplx(0, 0)));
    for (const auto& l : network.lines) {
        if (l.r_ohm() == 0.0 && l.x_ohm() == 0.0) continue;
        cplx yl = 1.0 / (cplx(l.r_ohm(), l.x_ohm()) / z_base);
        std::size_t a = node[idx[l.from_bus]];
        std::size_t b = node[idx[l.to_bus]];
        y[a][a] += yl;
        y[b][b] += yl;
        y[a][b] -= yl;
        y[b][a] -= yl;
    }

    std::vector<cplx> s_node(nn, cplx(0, 0));
    for (const auto& [id, l] : snapshot.loads)
        s_node[node[idx.at(id)]] += cplx(l.p_kw, l.q_kvar) / evsim::kBasePowerKva;

    // fixed point: Y_red v_unknown = i_inj - Y_col_source * v_source
    std::vector<std::size_t> unknown;
    for (std::size_t k = 0; k < nn; ++k)
        if (k != source_node) unknown.push_back(k);

    std::vector<cplx> v(nn, cplx(source_v_pu, 0.0));
    for (int it = 0; it < max_iterations; ++it) {
        std::vector<std::vector<cplx>> a(unknown.size(), std::vector<cplx>(unknown.size()));
        std::vector<cplx> b(unknown.size());
        for (std::size_t r = 0; r < unknown.size(); ++r) {
            std::size_t k = unknown[r];
            for (std::size_t c = 0; c < unknown.size(); ++c) a[r][c] = y[k][unknown[c]];
            cplx i_inj = -std::conj(s_node[k] / v[k]);  // consumption
            b[r] = i_inj - y[k][source_node] * cplx(source_v_pu, 0.0);
        }
        auto x = unknown.empty() ? std::vector<cplx>{} : solve_linear(a, b);
        double delta = 0.0;
        for (std::size_t r = 0; r < unknown.size(); ++r) {
            delta = std::max(delta, std::abs(x[r] - v[unknown[r]]));
            v[unknown[r]] = x[r];
        }
        if (delta < tol) break;
    }

    std::map<std::string, cplx> out;
    for (std::size_t i = 0; i < nb; ++i) out[network.buses[i].id] = v[node[i]];
    return out;
}

// Closed-form receiving-end voltage magnitude for a 2-bus feeder with a
// constant-power load: |V|^4 + (2(pr+qx) - |V0|^2)|V|^2 + (p^2+q^2)|z|^2 = 0.
inline double two_bus_voltage_pu(double v0_pu, double r_pu, double x_pu, double p_pu,
                                 double q_pu) {
    double b = 2.0 * (p_pu * r_pu + q_pu * x_pu) - v0_pu * v0_pu;
    double c = (p_pu * p_pu + q_pu * q_pu) * (r_pu * r_pu + x_pu * x_pu);
    double disc = b * b - 4.0 * c;
    if (disc < 0.0) throw std::runtime_error("two-bus case has no real solution");
    return std::sqrt((-b + std::sqrt(disc)) / 2.0);
}

}  // namespace evsim_test

#endif
