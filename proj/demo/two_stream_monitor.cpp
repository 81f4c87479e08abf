// Minimal embedding of the library without the simulator: two sites run
// approximate counting over zipf streams and the coordinator is queried
// every 500 ticks.

#include <iostream>
#include <vector>

#include "slidemon/slidemon.hpp"

int main() {
    using namespace slidemon;
    const WindowConfig window(200, 0);
    const double eps = 0.1;

    std::vector<std::vector<TimedItem>> streams;
    for (std::uint64_t seed : {11u, 12u}) {
        GeneratorSpec g;
        g.kind = GeneratorKind::zipf;
        g.universe = 50;
        g.rate = 3.0;
        g.duration = 2000;
        g.seed = seed;
        streams.push_back(generate_stream(g));
    }

    std::vector<WindowEstimator> est;
    std::vector<SiteState> sites;
    for (StreamId s = 0; s < 2; ++s) {
        const auto params = ProtocolParams::approximate_counting(eps);
        est.emplace_back(window, params.lambda);
        sites.emplace_back(s, params);
    }
    RootState root(2);
    std::vector<std::size_t> next(2, 0);
    Count words = 0;

    for (Tick t = 0; t < 2000; ++t) {
        for (std::size_t s = 0; s < 2; ++s) {
            while (next[s] < streams[s].size() && streams[s][next[s]].arrival == t)
                est[s].insert(streams[s][next[s]++]);
            est[s].advance(t);
            for (const Message& m : ac_on_advance(sites[s], est[s], t)) {
                root.ingest(m);
                words += m.words();
            }
        }
        if (t % 500 == 499) {
            const Count truth = est[0].count(0) + est[1].count(0);
            std::cout << "t=" << t << " item 0: root=" << root.query_item(0) << " true=" << truth
                      << " words so far=" << words << '\n';
        }
    }
}
