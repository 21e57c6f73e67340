#include "advslam/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace advslam {

namespace {

struct TexturedPlane {
    Eigen::Vector3d p0;
    Eigen::Vector3d normal;
    Eigen::Vector3d u, v;  // in-plane axes
    double half_u = 0, half_v = 0;
    int id = 0;
};

std::vector<TexturedPlane> build_scene(const std::string& scene) {
    using V = Eigen::Vector3d;
    std::vector<TexturedPlane> planes;
    if (scene == "wall") {
        planes.push_back({V(0, 0, 2.6), V(0, 0, -1), V(1, 0, 0), V(0, 1, 0), 4.0, 3.0, 0});
        return planes;
    }
    if (scene != "room") throw ConfigError("unknown synthetic scene: " + scene);
    // Box interior around the camera start; x right, y down, z forward.
    planes.push_back({V(0, 0, 2.6), V(0, 0, -1), V(1, 0, 0), V(0, 1, 0), 3.0, 2.0, 0});   // back
    planes.push_back({V(-1.8, 0, 1.3), V(1, 0, 0), V(0, 0, 1), V(0, 1, 0), 1.4, 2.0, 1}); // left
    planes.push_back({V(1.8, 0, 1.3), V(-1, 0, 0), V(0, 0, 1), V(0, 1, 0), 1.4, 2.0, 2}); // right
    planes.push_back({V(0, 1.1, 1.3), V(0, -1, 0), V(1, 0, 0), V(0, 0, 1), 3.0, 1.4, 3}); // floor
    planes.push_back({V(0, -1.1, 1.3), V(0, 1, 0), V(1, 0, 0), V(0, 0, 1), 3.0, 1.4, 4}); // ceiling
    return planes;
}

inline double hash01(uint64_t seed, uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    uint64_t h = mix_seed(seed, a * 0x9e3779b1u + 1);
    h = mix_seed(h, b * 0x85ebca6bu + 2);
    h = mix_seed(h, c * 0xc2b2ae35u + 3);
    h = mix_seed(h, d + 5);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline void cell_color(uint64_t seed, int plane, double a, double b, double cell_size,
                       uint64_t salt, double rgb[3]) {
    const auto ca = static_cast<uint64_t>(static_cast<int64_t>(std::floor(a / cell_size)) + (1 << 20));
    const auto cb = static_cast<uint64_t>(static_cast<int64_t>(std::floor(b / cell_size)) + (1 << 20));
    for (int c = 0; c < 3; ++c) {
        rgb[c] = hash01(seed, ca, cb, static_cast<uint64_t>(plane) * 8 + c, salt);
    }
}

// Two-scale blocky value noise: coarse blocks carry the structure, the fine
// scale adds corner-rich detail without washing out contrast.
inline void texture_color(uint64_t seed, int plane, double a, double b, double rgb[3]) {
    double coarse[3], fine[3];
    cell_color(seed, plane, a, b, 0.22, 11, coarse);
    cell_color(seed, plane, a, b, 0.07, 29, fine);
    for (int c = 0; c < 3; ++c) rgb[c] = std::clamp(0.62 * coarse[c] + 0.38 * fine[c], 0.0, 1.0);
}

struct Hit {
    double s = std::numeric_limits<double>::infinity();
    int plane = -1;
    double a = 0, b = 0;
};

inline Hit trace(const std::vector<TexturedPlane>& planes, const Eigen::Vector3d& origin,
                 const Eigen::Vector3d& dir) {
    Hit best;
    for (const auto& pl : planes) {
        const double denom = pl.normal.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double s = pl.normal.dot(pl.p0 - origin) / denom;
        if (s < 0.05 || s >= best.s) continue;
        const Eigen::Vector3d hit = origin + s * dir;
        const double a = (hit - pl.p0).dot(pl.u);
        const double b = (hit - pl.p0).dot(pl.v);
        if (std::abs(a) > pl.half_u || std::abs(b) > pl.half_v) continue;
        best = {s, pl.id, a, b};
    }
    return best;
}

Eigen::Matrix3d rot_y(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return r;
}

Eigen::Matrix3d rot_x(double a) {
    Eigen::Matrix3d r;
    r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return r;
}

void check_free_interior(const SyntheticConfig& cfg, const Pose& pose, int frame) {
    if (cfg.scene == "wall") {
        if (pose.t.z() > 2.2) {
            throw DataError("synthetic trajectory frame " + std::to_string(frame) +
                            " crosses the scene geometry");
        }
        return;
    }
    const auto& t = pose.t;
    if (std::abs(t.x()) > 1.5 || std::abs(t.y()) > 0.8 || t.z() < -0.3 || t.z() > 2.2) {
        throw DataError("synthetic trajectory frame " + std::to_string(frame) +
                        " leaves the free interior of the scene");
    }
}

}  // namespace

Pose scripted_pose(const SyntheticConfig& cfg, int i) {
    Pose pose;
    const double phase = 2.0 * M_PI * i / std::max(1, cfg.frame_count);
    if (cfg.trajectory == "static") {
        return pose;
    }
    if (cfg.trajectory == "sweep") {
        pose.t.x() = cfg.amplitude * std::sin(phase);
        pose.t.y() = 0.3 * cfg.amplitude * std::sin(2.0 * phase + 0.7);
        pose.t.z() = 0.4 * cfg.amplitude * (1.0 - std::cos(phase));
        pose.R = rot_y(cfg.yaw_amplitude * std::sin(phase + 0.3)) *
                 rot_x(0.3 * cfg.yaw_amplitude * std::sin(2.0 * phase));
        return pose;
    }
    if (cfg.trajectory == "forward") {
        pose.t.z() = cfg.amplitude * i / std::max(1, cfg.frame_count - 1);
        return pose;
    }
    throw ConfigError("unknown synthetic trajectory: " + cfg.trajectory);
}

void render_synthetic_frame(const SyntheticConfig& cfg, const Pose& camera_to_world,
                            double timestamp, ImageFrame& rgb, DepthFrame& depth) {
    const auto planes = build_scene(cfg.scene);
    rgb.timestamp = timestamp;
    rgb.width = cfg.width;
    rgb.height = cfg.height;
    rgb.channels = 3;
    rgb.pixels.assign(static_cast<size_t>(cfg.width) * cfg.height * 3, 0.0);
    depth.timestamp = timestamp;
    depth.width = cfg.width;
    depth.height = cfg.height;
    depth.depth.assign(static_cast<size_t>(cfg.width) * cfg.height, 0.0);

    const Eigen::Matrix3d R = camera_to_world.R;
    const Eigen::Vector3d origin = camera_to_world.t;
    const Intrinsics& K = cfg.intrinsics;

    // 2x2 supersampling keeps the blocky texture stable under subpixel motion;
    // depth is sampled at the pixel center to match back-projection.
    static constexpr double kSub[2] = {0.25, 0.75};
#pragma omp parallel for schedule(static)
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            double acc[3] = {0, 0, 0};
            for (double oy : kSub) {
                for (double ox : kSub) {
                    const Eigen::Vector3d dir_cam((x + ox - K.cx) / K.fx, (y + oy - K.cy) / K.fy, 1.0);
                    const Hit hit = trace(planes, origin, R * dir_cam);
                    if (hit.plane < 0) {
                        acc[0] += 0.05;
                        acc[1] += 0.05;
                        acc[2] += 0.05;
                        continue;
                    }
                    double c[3];
                    texture_color(cfg.texture_seed, hit.plane, hit.a, hit.b, c);
                    acc[0] += c[0];
                    acc[1] += c[1];
                    acc[2] += c[2];
                }
            }
            for (int c = 0; c < 3; ++c) rgb.at(x, y, c) = acc[c] / 4.0;

            // center ray; with an unnormalized direction (z = 1 in camera
            // frame) the ray parameter is exactly the camera-frame depth
            const Eigen::Vector3d dir_cam((x + 0.5 - K.cx) / K.fx, (y + 0.5 - K.cy) / K.fy, 1.0);
            const Hit hit = trace(planes, origin, R * dir_cam);
            depth.at(x, y) = hit.plane < 0 ? 0.0 : hit.s;
        }
    }
}

SyntheticSequence generate_synthetic_sequence(const SyntheticConfig& cfg) {
    if (cfg.frame_count < 2) throw ConfigError("synthetic sequence needs at least 2 frames");
    SyntheticSequence seq;
    seq.frames.reserve(cfg.frame_count);
    seq.depths.reserve(cfg.frame_count);
    for (int i = 0; i < cfg.frame_count; ++i) {
        const Pose pose = scripted_pose(cfg, i);
        check_free_interior(cfg, pose, i);
        const double ts = i / cfg.fps;
        ImageFrame rgb;
        DepthFrame d;
        render_synthetic_frame(cfg, pose, ts, rgb, d);
        seq.frames.push_back(std::move(rgb));
        seq.depths.push_back(std::move(d));
        seq.ground_truth.push_back({ts, pose});
    }
    return seq;
}

void write_synthetic_tum(const SyntheticSequence& seq, const std::filesystem::path& out_dir,
                         double depth_factor) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "rgb");
    fs::create_directories(out_dir / "depth");

    std::ofstream rgb_list(out_dir / "rgb.txt");
    std::ofstream depth_list(out_dir / "depth.txt");
    std::ofstream gt_list(out_dir / "groundtruth.txt");
    rgb_list << "# color images\n# timestamp filename\n";
    depth_list << "# depth images\n# timestamp filename\n";
    gt_list << "# ground truth trajectory\n# timestamp tx ty tz qx qy qz qw\n";

    char buf[256];
    for (size_t i = 0; i < seq.frames.size(); ++i) {
        const double ts = seq.frames[i].timestamp;
        std::snprintf(buf, sizeof(buf), "%.6f", ts);
        const std::string stamp = buf;
        encode_rgb(seq.frames[i], out_dir / "rgb" / (stamp + ".png"));
        encode_depth(seq.depths[i], out_dir / "depth" / (stamp + ".png"), depth_factor);
        rgb_list << stamp << " rgb/" << stamp << ".png\n";
        depth_list << stamp << " depth/" << stamp << ".png\n";

        const Pose& p = seq.ground_truth[i].pose;
        Eigen::Quaterniond q(p.R);
        q.normalize();
        if (q.w() < 0) q.coeffs() = -q.coeffs();
        std::snprintf(buf, sizeof(buf), "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f", ts, p.t.x(),
                      p.t.y(), p.t.z(), q.x(), q.y(), q.z(), q.w());
        gt_list << buf << "\n";
    }
}

}  // namespace advslam
