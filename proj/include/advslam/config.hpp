#ifndef ADVSLAM_CONFIG_HPP
#define ADVSLAM_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "advslam/attack.hpp"
#include "advslam/odometry.hpp"
#include "advslam/schedule.hpp"
#include "advslam/synthetic.hpp"

namespace advslam {

/// Flat sectioned key=value text: [section] headers, '#' or ';' comments,
/// whitespace trimmed. Duplicate keys keep the last value.
class IniFile {
public:
    static IniFile parse_file(const std::filesystem::path& path);
    static IniFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    /// Throws ConfigError when a present key is not in the allowed list for
    /// its section (typo protection).
    void require_known(const std::map<std::string, std::vector<std::string>>& allowed) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_;
};

enum class DatasetKind { Tum, Synthetic };
enum class AttackTarget { None, Rgb, Depth, Both };
enum class TimingMode { Deterministic, Wallclock };

struct ExperimentConfig {
    // [dataset]
    DatasetKind dataset = DatasetKind::Synthetic;
    std::string tum_path;
    double association_tolerance = 0.02;  // TUM tooling convention
    double depth_factor = 5000.0;         // TUM convention
    std::string regions_path;
    Intrinsics tum_intrinsics{517.3, 516.5, 318.6, 255.3};  // fr1 defaults
    SyntheticConfig synthetic;

    // [surrogate]
    std::string weights_path;
    uint64_t surrogate_seed = 42;

    // [attack]
    AttackConfig attack;
    AttackTarget target = AttackTarget::Rgb;

    // [schedule]
    std::string schedule_text = "all";
    int schedule_window = 30;

    // [frontend] / [estimator]
    FrontendConfig frontend;
    EstimatorConfig estimator;

    // [run]
    std::string output_dir = "out";
    uint64_t seed = 1;
    TimingMode timing = TimingMode::Deterministic;
    bool with_baseline = false;

    void validate() const;
};

ExperimentConfig experiment_config_from_ini(const IniFile& ini);
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);

/// Full INI echo with every resolved value; re-parsing it reproduces the run.
std::string serialize_config(const ExperimentConfig& cfg);

std::string to_string(AttackTarget t);
std::string to_string(TimingMode t);

}  // namespace advslam

#endif
