#include "evsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "evsim/csv.hpp"

namespace evsim {

Construction construction_from_string(const std::string& s) {
    if (s == "OH") return Construction::Overhead;
    if (s == "UG") return Construction::Underground;
    throw ParseError("unknown construction type '" + s + "', expected OH or UG");
}

std::string to_string(Construction c) {
    return c == Construction::Overhead ? "OH" : "UG";
}

double VoltageLevel::v_ln_kv() const {
    return v_ll_kv / std::sqrt(3.0);
}

const Bus* Network::find_bus(const std::string& id) const {
    auto it = std::lower_bound(buses.begin(), buses.end(), id,
                               [](const Bus& b, const std::string& key) { return b.id < key; });
    if (it != buses.end() && it->id == id) return &*it;
    return nullptr;
}

int Network::total_households() const {
    int total = 0;
    for (const auto& b : buses) total += b.households;
    return total;
}

namespace {

int parse_phases(const std::string& field, const std::string& file, int row) {
    long p = csv::to_long(field, file, row);
    if (p < 1 || p > 3) {
        std::ostringstream os;
        os << file << " row " << row << ": phases must be 1, 2 or 3, got " << p;
        throw ParseError(os.str());
    }
    return static_cast<int>(p);
}

}  // namespace

Network parse_network(const std::string& buses_csv_path,
                      const std::string& lines_csv_path,
                      const std::string& source_id,
                      VoltageLevel voltage) {
    if (voltage.v_ll_kv <= 0.0)
        throw std::invalid_argument("voltage level must be positive");

    Network net;
    net.source_bus = source_id;
    net.voltage = voltage;

    auto bus_rows = csv::read_file(buses_csv_path, {"bus_id", "phases", "households"});
    std::set<std::string> bus_ids;
    for (const auto& row : bus_rows) {
        Bus b;
        b.id = row.fields[0];
        b.phase_count = parse_phases(row.fields[1], buses_csv_path, row.lineno);
        long hh = csv::to_long(row.fields[2], buses_csv_path, row.lineno);
        if (hh < 0) {
            std::ostringstream os;
            os << buses_csv_path << " row " << row.lineno << ": negative household count";
            throw ParseError(os.str());
        }
        b.households = static_cast<int>(hh);
        if (!bus_ids.insert(b.id).second) {
            std::ostringstream os;
            os << buses_csv_path << " row " << row.lineno << ": duplicate bus id " << b.id;
            throw ParseError(os.str());
        }
        net.buses.push_back(std::move(b));
    }
    if (!bus_ids.count(source_id))
        throw ParseError("source bus " + source_id + " not present in " + buses_csv_path);

    std::sort(net.buses.begin(), net.buses.end(),
              [](const Bus& a, const Bus& b) { return a.id < b.id; });

    auto line_rows = csv::read_file(
        lines_csv_path, {"line_id", "from_bus", "to_bus", "phases", "construction", "length_mi",
                         "r_ohm_per_mi", "x_ohm_per_mi", "ampacity_a"});
    std::set<std::string> line_ids;
    for (const auto& row : line_rows) {
        LineSegment l;
        l.id = row.fields[0];
        l.from_bus = row.fields[1];
        l.to_bus = row.fields[2];
        l.phase_count = parse_phases(row.fields[3], lines_csv_path, row.lineno);
        l.construction = construction_from_string(row.fields[4]);
        l.length_mi = csv::to_double(row.fields[5], lines_csv_path, row.lineno);
        l.r_ohm_per_mi = csv::to_double(row.fields[6], lines_csv_path, row.lineno);
        l.x_ohm_per_mi = csv::to_double(row.fields[7], lines_csv_path, row.lineno);
        l.rated_ampacity_a = csv::to_double(row.fields[8], lines_csv_path, row.lineno);

        std::ostringstream ctx;
        ctx << lines_csv_path << " row " << row.lineno << ": ";
        if (!line_ids.insert(l.id).second)
            throw ParseError(ctx.str() + "duplicate line id " + l.id);
        if (l.from_bus == l.to_bus)
            throw ParseError(ctx.str() + "line " + l.id + " connects bus " + l.from_bus +
                             " to itself");
        if (!bus_ids.count(l.from_bus))
            throw ParseError(ctx.str() + "unknown bus " + l.from_bus);
        if (!bus_ids.count(l.to_bus))
            throw ParseError(ctx.str() + "unknown bus " + l.to_bus);
        if (l.length_mi < 0.0)
            throw ParseError(ctx.str() + "negative length");
        if (l.r_ohm_per_mi < 0.0 || l.x_ohm_per_mi < 0.0)
            throw ParseError(ctx.str() + "negative impedance");
        if (l.rated_ampacity_a <= 0.0)
            throw ParseError(ctx.str() + "ampacity must be positive");
        net.lines.push_back(std::move(l));
    }

    std::sort(net.lines.begin(), net.lines.end(),
              [](const LineSegment& a, const LineSegment& b) { return a.id < b.id; });

    for (const auto& l : net.lines) {
        const Bus* from = net.find_bus(l.from_bus);
        if (l.phase_count > from->phase_count)
            throw ParseError("line " + l.id + " has " + std::to_string(l.phase_count) +
                             " phases but bus " + from->id + " has only " +
                             std::to_string(from->phase_count));
    }
    return net;
}

std::vector<std::string> validate_radial(const Network& network) {
    // adjacency over undirected edges; children explored in ascending id order
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& l : network.lines) {
        adj[l.from_bus].push_back(l.to_bus);
        adj[l.to_bus].push_back(l.from_bus);
    }
    for (auto& [id, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

    std::vector<std::string> order;
    std::set<std::string> visited;
    std::vector<std::pair<std::string, std::string>> stack;  // (bus, parent)
    stack.emplace_back(network.source_bus, "");
    while (!stack.empty()) {
        auto [bus, parent] = stack.back();
        stack.pop_back();
        if (!visited.insert(bus).second)
            throw TopologyError("not radial: cycle through bus " + bus);
        order.push_back(bus);
        auto it = adj.find(bus);
        if (it == adj.end()) continue;
        // push in reverse so ascending ids pop first
        for (auto nb = it->second.rbegin(); nb != it->second.rend(); ++nb) {
            if (*nb != parent) stack.emplace_back(*nb, bus);
        }
    }

    if (order.size() != network.buses.size()) {
        for (const auto& b : network.buses)
            if (!visited.count(b.id))
                throw TopologyError("unreachable bus " + b.id);
    }
    if (network.lines.size() + 1 != network.buses.size())
        throw TopologyError("not radial: " + std::to_string(network.buses.size()) +
                            " buses need " + std::to_string(network.buses.size() - 1) +
                            " lines, got " + std::to_string(network.lines.size()));
    return order;
}

Network rebase_voltage(const Network& network, VoltageLevel voltage) {
    if (voltage.v_ll_kv <= 0.0)
        throw std::invalid_argument("voltage level must be positive");
    Network out = network;
    out.voltage = voltage;
    return out;
}

void write_buses_csv(const Network& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "bus_id,phases,households\n";
    for (const auto& b : network.buses)
        out << b.id << ',' << b.phase_count << ',' << b.households << '\n';
}

void write_lines_csv(const Network& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "line_id,from_bus,to_bus,phases,construction,length_mi,r_ohm_per_mi,x_ohm_per_mi,"
           "ampacity_a\n";
    char buf[128];
    for (const auto& l : network.lines) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g,%.6g", l.length_mi, l.r_ohm_per_mi,
                      l.x_ohm_per_mi, l.rated_ampacity_a);
        out << l.id << ',' << l.from_bus << ',' << l.to_bus << ',' << l.phase_count << ','
            << to_string(l.construction) << ',' << buf << '\n';
    }
}

}  // namespace evsim
