#include "advslam/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace advslam {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text, const std::string& origin) {
    IniFile ini;
    ini.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section");
            }
            section = trim(t.substr(1, t.size() - 2));
            ini.sections_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        ini.sections_[section][key] = trim(t.substr(eq + 1));
    }
    return ini;
}

IniFile IniFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.string());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not a number");
    }
}

int IniFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
        size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not an integer");
    }
}

uint64_t IniFile::get_u64(const std::string& section, const std::string& key,
                          uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    try {
        size_t pos = 0;
        const uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                          "' is not an unsigned integer");
    }
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key, "");
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v + "' is not a boolean");
}

void IniFile::require_known(const std::map<std::string, std::vector<std::string>>& allowed) const {
    for (const auto& [section, keys] : sections_) {
        const auto it = allowed.find(section);
        if (it == allowed.end()) {
            throw ConfigError(origin_ + ": unknown section [" + section + "]");
        }
        for (const auto& [key, value] : keys) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
                throw ConfigError(origin_ + ": unknown key '" + key + "' in section [" + section +
                                  "]");
            }
        }
    }
}

void ExperimentConfig::validate() const {
    if (dataset == DatasetKind::Tum && tum_path.empty()) {
        throw ConfigError("dataset type tum requires a path");
    }
    if (association_tolerance <= 0) throw ConfigError("association tolerance must be > 0");
    if (depth_factor <= 0) throw ConfigError("depth factor must be > 0");
    attack.validate();
    const Schedule s = parse_schedule(schedule_text);
    if (s.variant == ScheduleVariant::SpatiallyAdaptive && regions_path.empty()) {
        throw ConfigError("spatially_adaptive schedule requires [dataset] regions");
    }
    if (frontend.max_features < 1) throw ConfigError("max_features must be >= 1");
    if (estimator.ransac_iterations < 1) throw ConfigError("ransac_iterations must be >= 1");
    if (estimator.inlier_radius <= 0) throw ConfigError("inlier_radius must be > 0");
}

ExperimentConfig experiment_config_from_ini(const IniFile& ini) {
    static const std::map<std::string, std::vector<std::string>> kAllowed = {
        {"", {}},
        {"dataset",
         {"type", "path", "association_tolerance", "depth_factor", "regions", "fx", "fy", "cx",
          "cy", "frames", "width", "height", "scene", "trajectory", "amplitude", "yaw_amplitude",
          "texture_seed", "fps"}},
        {"surrogate", {"weights", "seed"}},
        {"attack",
         {"method", "mode", "epsilon", "alpha", "iterations", "target", "target_label_policy",
          "target_label", "seed", "depth_min", "depth_max"}},
        {"schedule", {"variant", "window"}},
        {"frontend",
         {"corner_threshold", "max_features", "grid_cell", "match_max_distance", "match_ratio",
          "pattern_seed"}},
        {"estimator",
         {"ransac_iterations", "inlier_radius", "min_inliers", "refresh_inliers",
          "refresh_translation", "seed"}},
        {"run", {"output", "seed", "timing", "baseline"}},
    };
    ini.require_known(kAllowed);

    ExperimentConfig cfg;

    const std::string ds = ini.get("dataset", "type", "synthetic");
    if (ds == "tum") cfg.dataset = DatasetKind::Tum;
    else if (ds == "synthetic") cfg.dataset = DatasetKind::Synthetic;
    else throw ConfigError("unknown dataset type '" + ds + "'");
    cfg.tum_path = ini.get("dataset", "path", "");
    cfg.association_tolerance = ini.get_double("dataset", "association_tolerance", 0.02);
    cfg.depth_factor = ini.get_double("dataset", "depth_factor", 5000.0);
    cfg.regions_path = ini.get("dataset", "regions", "");

    cfg.synthetic.frame_count = ini.get_int("dataset", "frames", 200);
    cfg.synthetic.width = ini.get_int("dataset", "width", 160);
    cfg.synthetic.height = ini.get_int("dataset", "height", 120);
    cfg.synthetic.scene = ini.get("dataset", "scene", "room");
    cfg.synthetic.trajectory = ini.get("dataset", "trajectory", "sweep");
    cfg.synthetic.amplitude = ini.get_double("dataset", "amplitude", 0.25);
    cfg.synthetic.yaw_amplitude = ini.get_double("dataset", "yaw_amplitude", 0.04);
    cfg.synthetic.texture_seed = ini.get_u64("dataset", "texture_seed", 7);
    cfg.synthetic.fps = ini.get_double("dataset", "fps", 30.0);
    if (cfg.dataset == DatasetKind::Synthetic) {
        cfg.synthetic.intrinsics.fx = ini.get_double("dataset", "fx", 130.0);
        cfg.synthetic.intrinsics.fy = ini.get_double("dataset", "fy", 130.0);
        cfg.synthetic.intrinsics.cx = ini.get_double("dataset", "cx", cfg.synthetic.width / 2.0 - 0.5);
        cfg.synthetic.intrinsics.cy = ini.get_double("dataset", "cy", cfg.synthetic.height / 2.0 - 0.5);
    } else {
        cfg.tum_intrinsics.fx = ini.get_double("dataset", "fx", 517.3);
        cfg.tum_intrinsics.fy = ini.get_double("dataset", "fy", 516.5);
        cfg.tum_intrinsics.cx = ini.get_double("dataset", "cx", 318.6);
        cfg.tum_intrinsics.cy = ini.get_double("dataset", "cy", 255.3);
    }

    cfg.weights_path = ini.get("surrogate", "weights", "");
    cfg.surrogate_seed = ini.get_u64("surrogate", "seed", 42);

    const std::string method = ini.get("attack", "method", "fgsm");
    if (method == "fgsm") cfg.attack.method = AttackMethod::FGSM;
    else if (method == "pgd") cfg.attack.method = AttackMethod::PGD;
    else throw ConfigError("unknown attack method '" + method + "'");
    const std::string mode = ini.get("attack", "mode", "untargeted");
    if (mode == "untargeted") cfg.attack.mode = AttackMode::Untargeted;
    else if (mode == "targeted") cfg.attack.mode = AttackMode::Targeted;
    else throw ConfigError("unknown attack mode '" + mode + "'");
    cfg.attack.epsilon = ini.get_double("attack", "epsilon", 0.10);
    cfg.attack.alpha = ini.get_double("attack", "alpha", 0.0);
    cfg.attack.iterations = ini.get_int("attack", "iterations", 10);
    const std::string policy = ini.get("attack", "target_label_policy", "random");
    if (policy == "random") cfg.attack.policy = TargetLabelPolicy::RandomPerFrame;
    else if (policy == "fixed") cfg.attack.policy = TargetLabelPolicy::Fixed;
    else throw ConfigError("unknown target label policy '" + policy + "'");
    cfg.attack.fixed_label = ini.get_int("attack", "target_label", 0);
    cfg.attack.depth_min = ini.get_double("attack", "depth_min", 0.0);
    cfg.attack.depth_max = ini.get_double("attack", "depth_max", 10.0);

    const std::string target = ini.get("attack", "target", "rgb");
    if (target == "none") cfg.target = AttackTarget::None;
    else if (target == "rgb") cfg.target = AttackTarget::Rgb;
    else if (target == "depth") cfg.target = AttackTarget::Depth;
    else if (target == "both") cfg.target = AttackTarget::Both;
    else throw ConfigError("unknown attack target '" + target + "'");

    cfg.schedule_text = ini.get("schedule", "variant", "all");
    cfg.schedule_window = ini.get_int("schedule", "window", 30);

    cfg.frontend.corner_threshold = ini.get_double("frontend", "corner_threshold", 0.06);
    cfg.frontend.max_features = ini.get_int("frontend", "max_features", 1000);
    cfg.frontend.grid_cell = ini.get_int("frontend", "grid_cell", 32);
    cfg.frontend.match_max_distance = ini.get_int("frontend", "match_max_distance", 64);
    cfg.frontend.match_ratio = ini.get_double("frontend", "match_ratio", 0.8);
    cfg.frontend.pattern_seed = ini.get_u64("frontend", "pattern_seed", 17);

    cfg.estimator.ransac_iterations = ini.get_int("estimator", "ransac_iterations", 500);
    cfg.estimator.inlier_radius = ini.get_double("estimator", "inlier_radius", 0.02);
    cfg.estimator.min_inliers = ini.get_int("estimator", "min_inliers", 15);
    cfg.estimator.refresh_inliers = ini.get_int("estimator", "refresh_inliers", 40);
    cfg.estimator.refresh_translation = ini.get_double("estimator", "refresh_translation", 0.15);
    cfg.estimator.seed = ini.get_u64("estimator", "seed", 13);

    cfg.output_dir = ini.get("run", "output", "out");
    cfg.seed = ini.get_u64("run", "seed", 1);
    cfg.attack.seed = ini.get_u64("attack", "seed", cfg.seed);
    const std::string timing = ini.get("run", "timing", "deterministic");
    if (timing == "deterministic") cfg.timing = TimingMode::Deterministic;
    else if (timing == "wallclock") cfg.timing = TimingMode::Wallclock;
    else throw ConfigError("unknown timing mode '" + timing + "'");
    cfg.with_baseline = ini.get_bool("run", "baseline", false);

    cfg.validate();
    return cfg;
}

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
    return experiment_config_from_ini(IniFile::parse_file(path));
}

std::string to_string(AttackTarget t) {
    switch (t) {
        case AttackTarget::None: return "none";
        case AttackTarget::Rgb: return "rgb";
        case AttackTarget::Depth: return "depth";
        case AttackTarget::Both: return "both";
    }
    return "?";
}

std::string to_string(TimingMode t) {
    return t == TimingMode::Deterministic ? "deterministic" : "wallclock";
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "[dataset]\n";
    os << "type = " << (cfg.dataset == DatasetKind::Tum ? "tum" : "synthetic") << "\n";
    if (cfg.dataset == DatasetKind::Tum) {
        os << "path = " << cfg.tum_path << "\n";
        os << "fx = " << cfg.tum_intrinsics.fx << "\nfy = " << cfg.tum_intrinsics.fy << "\n";
        os << "cx = " << cfg.tum_intrinsics.cx << "\ncy = " << cfg.tum_intrinsics.cy << "\n";
    } else {
        os << "frames = " << cfg.synthetic.frame_count << "\n";
        os << "width = " << cfg.synthetic.width << "\nheight = " << cfg.synthetic.height << "\n";
        os << "scene = " << cfg.synthetic.scene << "\n";
        os << "trajectory = " << cfg.synthetic.trajectory << "\n";
        os << "amplitude = " << cfg.synthetic.amplitude << "\n";
        os << "yaw_amplitude = " << cfg.synthetic.yaw_amplitude << "\n";
        os << "texture_seed = " << cfg.synthetic.texture_seed << "\n";
        os << "fps = " << cfg.synthetic.fps << "\n";
        os << "fx = " << cfg.synthetic.intrinsics.fx << "\nfy = " << cfg.synthetic.intrinsics.fy
           << "\n";
        os << "cx = " << cfg.synthetic.intrinsics.cx << "\ncy = " << cfg.synthetic.intrinsics.cy
           << "\n";
    }
    os << "association_tolerance = " << cfg.association_tolerance << "\n";
    os << "depth_factor = " << cfg.depth_factor << "\n";
    if (!cfg.regions_path.empty()) os << "regions = " << cfg.regions_path << "\n";

    os << "\n[surrogate]\n";
    if (!cfg.weights_path.empty()) os << "weights = " << cfg.weights_path << "\n";
    os << "seed = " << cfg.surrogate_seed << "\n";

    os << "\n[attack]\n";
    os << "method = " << (cfg.attack.method == AttackMethod::FGSM ? "fgsm" : "pgd") << "\n";
    os << "mode = " << (cfg.attack.mode == AttackMode::Untargeted ? "untargeted" : "targeted")
       << "\n";
    os << "epsilon = " << cfg.attack.epsilon << "\n";
    os << "alpha = " << cfg.attack.alpha << "\n";
    os << "iterations = " << cfg.attack.iterations << "\n";
    os << "target = " << to_string(cfg.target) << "\n";
    os << "target_label_policy = "
       << (cfg.attack.policy == TargetLabelPolicy::RandomPerFrame ? "random" : "fixed") << "\n";
    os << "target_label = " << cfg.attack.fixed_label << "\n";
    os << "seed = " << cfg.attack.seed << "\n";
    os << "depth_min = " << cfg.attack.depth_min << "\n";
    os << "depth_max = " << cfg.attack.depth_max << "\n";

    os << "\n[schedule]\n";
    os << "variant = " << cfg.schedule_text << "\n";
    os << "window = " << cfg.schedule_window << "\n";

    os << "\n[frontend]\n";
    os << "corner_threshold = " << cfg.frontend.corner_threshold << "\n";
    os << "max_features = " << cfg.frontend.max_features << "\n";
    os << "grid_cell = " << cfg.frontend.grid_cell << "\n";
    os << "match_max_distance = " << cfg.frontend.match_max_distance << "\n";
    os << "match_ratio = " << cfg.frontend.match_ratio << "\n";
    os << "pattern_seed = " << cfg.frontend.pattern_seed << "\n";

    os << "\n[estimator]\n";
    os << "ransac_iterations = " << cfg.estimator.ransac_iterations << "\n";
    os << "inlier_radius = " << cfg.estimator.inlier_radius << "\n";
    os << "min_inliers = " << cfg.estimator.min_inliers << "\n";
    os << "refresh_inliers = " << cfg.estimator.refresh_inliers << "\n";
    os << "refresh_translation = " << cfg.estimator.refresh_translation << "\n";
    os << "seed = " << cfg.estimator.seed << "\n";

    os << "\n[run]\n";
    os << "output = " << cfg.output_dir << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "timing = " << to_string(cfg.timing) << "\n";
    os << "baseline = " << (cfg.with_baseline ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace advslam
