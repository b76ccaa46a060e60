// Writes the bundled synthetic 240-bus feeder dataset. The output is
// committed under data/feeder240 and is fully determined by the fixed
// seed inside synthetic::feeder240().
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "evsim/synthetic.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    std::string out_dir = argc > 1 ? argv[1] : "data/feeder240";
    fs::create_directories(out_dir);

    auto ds = evsim::synthetic::feeder240();
    evsim::write_buses_csv(ds.network, (fs::path(out_dir) / "buses.csv").string());
    evsim::write_lines_csv(ds.network, (fs::path(out_dir) / "lines.csv").string());

    std::ofstream meters((fs::path(out_dir) / "meters.csv").string());
    meters << "bus_id,timestamp,kwh\n";
    char buf[32];
    for (const auto& s : ds.meters) {
        for (std::size_t i = 0; i < s.timestamps.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.6f", s.energy_kwh[i]);
            meters << s.bus_id << ',' << evsim::format_timestamp(s.timestamps[i]) << ',' << buf
                   << '\n';
        }
    }

    std::printf("wrote %zu buses, %zu lines, %zu meter series to %s\n", ds.network.buses.size(),
                ds.network.lines.size(), ds.meters.size(), out_dir.c_str());
    return 0;
}
