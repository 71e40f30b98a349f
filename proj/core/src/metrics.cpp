#include "mgres/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mgres {

double ConvergenceLog::at(int k) const {
    if (!has_cycle(k)) {
        throw std::out_of_range("cycle " + std::to_string(k) + " not in log of " + std::to_string(cycles()) +
                                " cycles");
    }
    return scaled[static_cast<std::size_t>(k)];
}

double estimate_mu(std::span<const double> scaled) {
    constexpr int first = 4;
    int last = -1;
    for (int k = first; k < static_cast<int>(scaled.size()); ++k) {
        if (scaled[static_cast<std::size_t>(k)] > kSaturationLevel) last = k;
    }
    const int ratios = last - first;
    if (ratios < 3) {
        throw std::invalid_argument("asymptotic window has " + std::to_string(std::max(ratios, 0)) +
                                    " ratios; need at least 3");
    }
    double log_sum = 0.0;
    for (int k = first + 1; k <= last; ++k) {
        log_sum += std::log(scaled[static_cast<std::size_t>(k)] / scaled[static_cast<std::size_t>(k - 1)]);
    }
    return std::exp(log_sum / ratios);
}

double estimate_mu(const ConvergenceLog& log) { return estimate_mu(std::span<const double>(log.scaled)); }

CycleAdvantage cycle_advantage(const ConvergenceLog& with_recovery, const ConvergenceLog& no_recovery, double mu,
                               int evaluation_cycle, std::string strategy) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("mu must lie in (0,1)");
    const double ratio = with_recovery.at(evaluation_cycle) / no_recovery.at(evaluation_cycle);
    const double kappa = std::log(ratio) / std::log(mu);
    return {kappa == 0.0 ? 0.0 : kappa, mu, evaluation_cycle, std::move(strategy)};  // no -0
}

int select_evaluation_cycle(const ConvergenceLog& baseline, const ConvergenceLog& no_recovery, double floor) {
    int k = baseline.cycles();
    while (k > 0 && !(baseline.has_cycle(k) && no_recovery.has_cycle(k) && baseline.at(k) > floor &&
                      no_recovery.at(k) > floor)) {
        --k;
    }
    if (k == 0) throw std::invalid_argument("no cycle above the residual floor in both logs");
    return k;
}

ConsistencyReport consistency_check(const ConvergenceLog& no_recovery, double kappa, double mu, int evaluation_cycle,
                                    double saturation) {
    ConsistencyReport report;
    report.probe_cycle = evaluation_cycle + static_cast<int>(std::lround(kappa));
    report.lower = std::pow(mu, 0.75);
    report.upper = std::pow(mu, -0.75);
    const int needed = evaluation_cycle + static_cast<int>(std::ceil(kappa));
    if (!no_recovery.has_cycle(evaluation_cycle) || !no_recovery.has_cycle(needed) ||
        !no_recovery.has_cycle(report.probe_cycle)) {
        report.notice = "no-recovery log ends at cycle " + std::to_string(no_recovery.cycles()) + ", need " +
                        std::to_string(needed);
        return report;
    }
    report.predicted = std::pow(mu, kappa) * no_recovery.at(evaluation_cycle);
    report.observed = no_recovery.at(report.probe_cycle);
    if (report.observed <= saturation) {
        report.notice = "probe cycle " + std::to_string(report.probe_cycle) + " is at round-off";
        return report;
    }
    report.ratio = report.observed / report.predicted;
    report.status = (report.ratio >= report.lower && report.ratio <= report.upper) ? ConsistencyReport::Status::Pass
                                                                                   : ConsistencyReport::Status::Fail;
    return report;
}

std::vector<AdvantageRecord> advantage_table(std::span<const PairedRuns> runs, double mu, int evaluation_cycle) {
    std::vector<AdvantageRecord> table;
    for (const PairedRuns& block : runs) {
        const auto zero = cycle_advantage(block.no_recovery, block.no_recovery, mu, evaluation_cycle, "none");
        table.push_back({block.fault_cycle, "none", 0, zero.kappa});
        for (const NamedLog& run : block.recovered) {
            const auto adv = cycle_advantage(run.log, block.no_recovery, mu, evaluation_cycle, run.strategy);
            table.push_back({block.fault_cycle, run.strategy, run.iterations, adv.kappa});
        }
    }
    return table;
}

std::string format_advantage_table(std::span<const AdvantageRecord> table) {
    std::size_t width = 10;
    for (const auto& row : table) width = std::max(width, row.strategy.size());
    std::ostringstream out;
    int current = -1;
    for (const auto& row : table) {
        if (row.fault_cycle != current) {
            if (current != -1) out << '\n';
            current = row.fault_cycle;
            out << "Fault after " << current << " cycles\n";
            out << "  " << std::string("strategy").append(width - 8, ' ') << "   kappa\n";
        }
        char value[32];
        std::snprintf(value, sizeof value, "%8.3f", row.kappa);
        out << "  " << row.strategy << std::string(width - row.strategy.size(), ' ') << ' ' << value << '\n';
    }
    return out.str();
}

}  // namespace mgres
