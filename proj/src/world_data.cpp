#include "timing/latency.hpp"

namespace timing {

// Same content as data/world_pings.csv; kept inline so simulations and tests
// do not depend on the working directory.
static const char kWorldPingsCsv[] =
    "city,Amsterdam,Dublin,Frankfurt,Los Angeles,New York,Paris,Seoul,Sydney,Vienna,Warsaw,Zurich,weight\n"
    "Amsterdam,0.0,18.898,8.758,151.911,77.245,35.695,216.451,252.287,18.933,23.054,16.311,18\n"
    "Dublin,18.929,0.0,22.573,148.112,79.363,17.038,248.549,259.371,33.799,43.349,35.984,17\n"
    "Frankfurt,8.788,22.438,0.0,157.842,83.328,15.538,222.781,267.780,24.022,22.531,7.014,17\n"
    "Los Angeles,151.8,148.003,157.759,0.0,68.998,144.772,134.145,160.565,168.401,171.428,159.026,8\n"
    "New York,77.233,79.835,83.573,68.949,0.0,72.738,202.481,200.356,95.397,95.097,104.104,8\n"
    "Paris,35.491,17.690,15.341,144.803,72.775,0.0,309.104,242.421,38.392,33.004,18.147,11\n"
    "Seoul,216.865,248.608,222.590,134.224,202.454,310.963,0.0,137.450,235.099,237.825,259.888,5\n"
    "Sydney,252.216,258.316,267.893,160.498,200.354,242.455,137.553,0.0,260.271,275.894,276.444,6\n"
    "Vienna,18.625,33.620,24.064,168.068,94.419,38.412,235.010,260.584,0.0,27.633,19.382,7\n"
    "Warsaw,22.942,43.371,22.771,171.280,95.172,33.041,237.683,275.929,27.679,0.0,23.273,3\n"
    "Zurich,16.290,35.949,7.004,159.108,104.166,18.162,259.767,276.520,19.421,23.304,0.0,15\n";

const PingTable& bundled_world_table() {
    static const PingTable table = PingTable::parse_csv(kWorldPingsCsv);
    return table;
}

const char* bundled_world_csv() { return kWorldPingsCsv; }

} // namespace timing
