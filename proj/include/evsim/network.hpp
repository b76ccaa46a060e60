#ifndef EVSIM_NETWORK_HPP
#define EVSIM_NETWORK_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace evsim {

class TopologyError : public std::runtime_error {
public:
    explicit TopologyError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Construction { Overhead, Underground };

Construction construction_from_string(const std::string& s);
std::string to_string(Construction c);

struct Bus {
    std::string id;
    int phase_count = 3;       // 1, 2 or 3
    int households = 0;
};

struct LineSegment {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    int phase_count = 3;
    Construction construction = Construction::Overhead;
    double length_mi = 0.0;
    double r_ohm_per_mi = 0.0;
    double x_ohm_per_mi = 0.0;
    double rated_ampacity_a = 0.0;  // per phase

    double r_ohm() const { return r_ohm_per_mi * length_mi; }
    double x_ohm() const { return x_ohm_per_mi * length_mi; }
};

// Operating line-to-line voltage in kV. The study levels are
// 4.16, 6.9, 13.8, 23.9 and 34.5 kV.
struct VoltageLevel {
    double v_ll_kv = 0.0;

    double v_ln_kv() const;
};

inline const std::vector<double> kStudyVoltagesKv = {4.16, 6.9, 13.8, 23.9, 34.5};

// Radial feeder: immutable after construction, safe to share read-only.
struct Network {
    std::string source_bus;
    VoltageLevel voltage;
    std::vector<Bus> buses;           // ascending bus id
    std::vector<LineSegment> lines;   // ascending line id

    const Bus* find_bus(const std::string& id) const;
    int total_households() const;
};

// Materializes a Network from the two CSV tables. Checks row-level
// consistency (unique ids, known bus references, line phases not
// exceeding the from-bus phases) but not topology.
Network parse_network(const std::string& buses_csv_path,
                      const std::string& lines_csv_path,
                      const std::string& source_id,
                      VoltageLevel voltage);

// Verifies the graph is a tree rooted at the source and returns the bus
// ids in topological order, source first, children of each bus visited
// in ascending bus-id order. Throws TopologyError on a cycle or an
// unreachable bus.
std::vector<std::string> validate_radial(const Network& network);

// Same network at a different operating voltage; impedances and
// ampacities untouched.
Network rebase_voltage(const Network& network, VoltageLevel voltage);

void write_buses_csv(const Network& network, const std::string& path);
void write_lines_csv(const Network& network, const std::string& path);

}  // namespace evsim

#endif
