#include "evsim/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace evsim {

namespace {

using cplx = std::complex<double>;

struct SweepModel {
    // buses in topological order, index 0 = source
    std::vector<std::string> order;
    std::map<std::string, int> bus_index;        // topo index by id
    std::vector<int> parent;                     // topo index of parent, -1 for source
    std::vector<int> parent_line;                // index into network.lines, -1 for source
    std::vector<std::vector<int>> children;      // topo indices
    std::vector<cplx> z_pu;                      // per line (network.lines order)
    std::vector<int> line_upstream;              // topo index of the upstream endpoint
    std::vector<int> line_downstream;
};

SweepModel build_model(const Network& network) {
    SweepModel m;
    m.order = validate_radial(network);
    for (std::size_t i = 0; i < m.order.size(); ++i)
        m.bus_index[m.order[i]] = static_cast<int>(i);

    double z_base_ohm = network.voltage.v_ll_kv * network.voltage.v_ll_kv /
                        (kBasePowerKva / 1000.0);

    m.parent.assign(m.order.size(), -1);
    m.parent_line.assign(m.order.size(), -1);
    m.children.resize(m.order.size());
    m.z_pu.resize(network.lines.size());
    m.line_upstream.resize(network.lines.size());
    m.line_downstream.resize(network.lines.size());
    for (std::size_t li = 0; li < network.lines.size(); ++li) {
        const auto& l = network.lines[li];
        int a = m.bus_index.at(l.from_bus);
        int b = m.bus_index.at(l.to_bus);
        // DFS preorder puts the upstream endpoint first, whatever the
        // table orientation
        int up = a < b ? a : b;
        int down = a < b ? b : a;
        m.parent[down] = up;
        m.parent_line[down] = static_cast<int>(li);
        m.children[up].push_back(down);
        m.line_upstream[li] = up;
        m.line_downstream[li] = down;
        m.z_pu[li] = cplx(l.r_ohm(), l.x_ohm()) / z_base_ohm;
    }
    return m;
}

std::vector<cplx> load_pu(const SweepModel& m, const LoadSnapshot& snapshot) {
    std::vector<cplx> s(m.order.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m.order.size(); ++i) {
        auto it = snapshot.loads.find(m.order[i]);
        if (it != snapshot.loads.end())
            s[i] = cplx(it->second.p_kw, it->second.q_kvar) / kBasePowerKva;
    }
    return s;
}

// Branch currents (upstream -> downstream) implied by a voltage profile:
// exact nodal load currents accumulated leaf to source.
std::vector<cplx> accumulate_branch_currents(const SweepModel& m, const std::vector<cplx>& v,
                                             const std::vector<cplx>& s_load) {
    std::vector<cplx> i_branch(m.line_upstream.size(), cplx(0.0, 0.0));
    for (std::size_t k = m.order.size(); k-- > 1;) {
        cplx i_sub = std::conj(s_load[k] / v[k]);
        for (int c : m.children[k]) i_sub += i_branch[m.parent_line[c]];
        i_branch[m.parent_line[k]] = i_sub;
    }
    return i_branch;
}

}  // namespace

const BusVoltage* PowerFlowSolution::find_bus(const std::string& id) const {
    for (const auto& b : bus_voltages)
        if (b.bus_id == id) return &b;
    return nullptr;
}

const LineFlow* PowerFlowSolution::find_line(const std::string& id) const {
    for (const auto& l : line_flows)
        if (l.line_id == id) return &l;
    return nullptr;
}

double line_current_a(double s_kva, VoltageLevel voltage, int phase_count) {
    if (voltage.v_ll_kv <= 0.0) throw std::invalid_argument("voltage level must be positive");
    if (s_kva < 0.0) throw std::invalid_argument("apparent power must be non-negative");
    switch (phase_count) {
        case 3:
            return s_kva / (std::sqrt(3.0) * voltage.v_ll_kv);
        case 2:
            return s_kva / (2.0 * voltage.v_ln_kv());
        case 1:
            return s_kva / voltage.v_ln_kv();
        default:
            throw std::invalid_argument("phase count must be 1, 2 or 3");
    }
}

PowerFlowSolution solve(const Network& network, const LoadSnapshot& snapshot,
                        const SolverSettings& settings) {
    if (settings.tolerance_kw <= 0.0) throw std::invalid_argument("tolerance must be positive");
    if (settings.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

    SweepModel m = build_model(network);
    std::vector<cplx> s_load = load_pu(m, snapshot);
    const std::size_t n = m.order.size();
    const std::size_t n_lines = network.lines.size();

    std::vector<cplx> v(n, cplx(settings.source_voltage_pu, 0.0));
    std::vector<cplx> i_branch(n_lines, cplx(0.0, 0.0));

    PowerFlowSolution sol;
    double mismatch_pu = 0.0;
    const double tol_pu = settings.tolerance_kw / kBasePowerKva;

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
        sol.iterations = iter;

        i_branch = accumulate_branch_currents(m, v, s_load);
        for (std::size_t k = 1; k < n; ++k) {
            int pl = m.parent_line[k];
            v[k] = v[m.parent[k]] - m.z_pu[pl] * i_branch[pl];
        }

        // nodal power mismatch against the spot loads, from Ohm's-law
        // currents on the updated profile (swept currents for zero-z)
        mismatch_pu = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            auto ohm_current = [&](int bus) {
                int pl = m.parent_line[bus];
                return std::abs(m.z_pu[pl]) > 0.0
                           ? (v[m.parent[bus]] - v[bus]) / m.z_pu[pl]
                           : i_branch[pl];
            };
            cplx i_net = ohm_current(static_cast<int>(k));
            for (int c : m.children[k]) i_net -= ohm_current(c);
            cplx s_delivered = v[k] * std::conj(i_net);
            mismatch_pu = std::max(mismatch_pu, std::abs(s_delivered - s_load[k]));
        }

        bool collapsed = false;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(v[k]) < 0.5) collapsed = true;
        if (collapsed) {
            sol.voltage_collapse = true;
            break;
        }
        if (mismatch_pu <= tol_pu) {
            sol.converged = true;
            break;
        }
    }
    sol.max_mismatch_kw = mismatch_pu * kBasePowerKva;

    sol.bus_voltages.reserve(n);
    for (const auto& b : network.buses) {
        int k = m.bus_index.at(b.id);
        sol.bus_voltages.push_back({b.id, std::abs(v[k]), std::arg(v[k])});
    }
    sol.line_flows.reserve(n_lines);
    for (std::size_t li = 0; li < n_lines; ++li) {
        const auto& l = network.lines[li];
        cplx s_send = v[m.line_upstream[li]] * std::conj(i_branch[li]) * kBasePowerKva;
        LineFlow f;
        f.line_id = l.id;
        f.s_kva = std::abs(s_send);
        f.i_actual_a = line_current_a(f.s_kva, network.voltage, l.phase_count);
        f.i_rated_a = l.rated_ampacity_a;
        sol.line_flows.push_back(f);
    }
    return sol;
}

std::complex<double> power_balance_kva(const Network& network, const LoadSnapshot& snapshot,
                                       const PowerFlowSolution& solution) {
    SweepModel m = build_model(network);
    std::vector<cplx> s_load = load_pu(m, snapshot);

    std::vector<cplx> v(m.order.size());
    for (const auto& bv : solution.bus_voltages)
        v[m.bus_index.at(bv.bus_id)] = std::polar(bv.v_pu, bv.angle_rad);

    auto i_branch = accumulate_branch_currents(m, v, s_load);

    cplx source_injection(0.0, 0.0);
    for (int c : m.children[0])
        source_injection += v[0] * std::conj(i_branch[m.parent_line[c]]);
    source_injection += s_load[0];  // any spot load at the source itself

    cplx losses(0.0, 0.0);
    for (std::size_t li = 0; li < m.z_pu.size(); ++li)
        losses += m.z_pu[li] * std::norm(i_branch[li]);

    cplx total_load(0.0, 0.0);
    for (const auto& s : s_load) total_load += s;

    return (source_injection - total_load - losses) * kBasePowerKva;
}

void write_flows_csv(const PowerFlowSolution& solution, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "line_id,s_kva,i_actual_a,i_rated_a\n";
    char buf[96];
    for (const auto& f : solution.line_flows) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g", f.s_kva, f.i_actual_a, f.i_rated_a);
        out << f.line_id << ',' << buf << '\n';
    }
}

void write_bus_voltages_csv(const PowerFlowSolution& solution, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "bus_id,v_pu,angle_rad\n";
    char buf[64];
    for (const auto& b : solution.bus_voltages) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g", b.v_pu, b.angle_rad);
        out << b.bus_id << ',' << buf << '\n';
    }
}

}  // namespace evsim
