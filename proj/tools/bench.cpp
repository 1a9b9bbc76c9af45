// Benchmark: serial reference kernels vs the indexed/OpenMP ones on a
// synthetic workload. Both paths must produce identical results; this only
// measures them.

#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#else
#include <chrono>
#endif

#include "kcsm/infection_graph.hpp"
#include "kcsm/pipeline.hpp"
#include "kcsm/synth.hpp"

namespace {

double now_s() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
#endif
}

struct Timing {
    double link_serial = 0, link_indexed = 0;
    double eliminate = 0, consolidate = 0, extract = 0, prune_serial = 0, prune_parallel = 0;
};

}  // namespace

int main(int argc, char** argv) {
    int per_day = argc > 1 ? std::atoi(argv[1]) : 1000;
    int days = argc > 2 ? std::atoi(argv[2]) : 5;

    kcsm::ZoneTopology topo = kcsm::builtin_ids2018_topology();
    kcsm::NoiseSpec noise;
    noise.alerts_per_day = per_day;
    noise.days = days;
    auto alerts = kcsm::generate(kcsm::builtin_ids2018_apt(), noise, topo);
    kcsm::StageMachine machine = kcsm::default_machine();

    printf("workload: %zu alerts (%d/day x %d days)\n", alerts.size(), per_day, days);
#ifdef _OPENMP
    printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
    printf("openmp: disabled at build time\n");
#endif

    Timing t;
    double t0 = now_s();
    kcsm::AlertGraph serial_graph =
        kcsm::build_alert_graph(machine, topo, alerts, nullptr, kcsm::ExecMode::Serial);
    double t1 = now_s();
    // The serial path above still uses the host index; time the O(n^2)
    // reference linker separately.
    auto reference_edges = kcsm::detail::link_edges_serial(machine, serial_graph.nodes(), 0);
    double t2 = now_s();
    kcsm::AlertGraph graph =
        kcsm::build_alert_graph(machine, topo, alerts, nullptr, kcsm::ExecMode::Parallel);
    double t3 = now_s();

    bool same = serial_graph.edges().size() == graph.edges().size() &&
                reference_edges.size() == graph.edges().size();
    t.link_serial = t2 - t1;
    t.link_indexed = t3 - t2;

    double t4 = now_s();
    kcsm::AlertGraph reduced = kcsm::eliminate_shortcuts(graph);
    double t5 = now_s();
    kcsm::InfectionGraph infection = kcsm::consolidate(reduced);
    double t6 = now_s();
    auto raw = kcsm::extract_scenarios(machine, infection);
    double t7 = now_s();
    auto pruned_serial = kcsm::prune_scenarios(raw, kcsm::ExecMode::Serial);
    double t8 = now_s();
    auto pruned = kcsm::prune_scenarios(raw, kcsm::ExecMode::Parallel);
    double t9 = now_s();
    (void)t0;

    same = same && pruned_serial.scenarios.size() == pruned.scenarios.size();

    printf("\n%-28s %10s\n", "kernel", "seconds");
    printf("%-28s %10.3f\n", "link (reference O(n^2))", t.link_serial);
    printf("%-28s %10.3f\n", "link (indexed + omp)", t.link_indexed);
    printf("%-28s %10.3f\n", "eliminate shortcuts", t5 - t4);
    printf("%-28s %10.3f\n", "consolidate", t6 - t5);
    printf("%-28s %10.3f\n", "extract", t7 - t6);
    printf("%-28s %10.3f\n", "prune (serial)", t8 - t7);
    printf("%-28s %10.3f\n", "prune (parallel)", t9 - t8);
    printf("\nedges %zu | kept %zu | infection graphs %zu | scenarios %zu -> %zu distinct\n",
           graph.edges().size(), reduced.edges().size(), infection.component_count(), raw.size(),
           pruned.scenarios.size());
    printf("serial/parallel agreement: %s\n", same ? "ok" : "MISMATCH");
    return same ? 0 : 1;
}
