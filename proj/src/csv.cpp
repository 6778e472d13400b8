#include "gait/csv.hpp"

#include <fstream>
#include <sstream>

#include "gait/checkpoint.hpp"
#include "gait/errors.hpp"

namespace gait {

std::string benchmark_csv_text(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream out;
    out << kBenchmarkHeader << '\n';
    for (const auto& r : rows) {
        out << r.algorithm << ',' << r.seed << ',';
        if (!r.error.empty()) {
            out << "ERROR,ERROR,ERROR,0,0\n";
            continue;
        }
        out << format_double(r.max_reward) << ',' << format_double(r.mean_reward_full) << ','
            << format_double(r.mean_reward_final10pct) << ',' << r.env_steps << ','
            << format_double(r.wall_seconds) << '\n';
    }
    return out.str();
}

std::string dagger_csv_text(const std::vector<DaggerRow>& rows) {
    std::ostringstream out;
    out << kDaggerHeader << '\n';
    for (const auto& r : rows) {
        out << r.variant << ',' << r.seed << ',';
        if (!r.error.empty()) {
            out << "0,0,ERROR,ERROR,ERROR,0,false\n";
            continue;
        }
        out << r.report.iteration << ',' << r.report.dataset_size << ','
            << format_double(r.report.learner_mean) << ',' << format_double(r.report.learner_max)
            << ',' << format_double(r.report.expert_mean) << ',' << r.report.env_steps << ','
            << (r.report.converged ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string curve_csv_text(const TrainReport& report) {
    if (report.episode_returns.empty()) {
        throw UsageError("curve_csv_text: report holds no episodes");
    }
    std::ostringstream out;
    out << kCurveHeader << '\n';
    double window_sum = 0.0;
    for (std::size_t i = 0; i < report.episode_returns.size(); ++i) {
        window_sum += report.episode_returns[i];
        if (i >= 100) window_sum -= report.episode_returns[i - 100];
        const std::size_t window = std::min<std::size_t>(i + 1, 100);
        out << i << ',' << format_double(report.episode_returns[i]) << ','
            << format_double(window_sum / static_cast<double>(window)) << '\n';
    }
    return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::string strip_wall_seconds(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.find_last_of(',');
        out << (comma == std::string::npos ? line : line.substr(0, comma)) << '\n';
    }
    return out.str();
}

}  // namespace gait
