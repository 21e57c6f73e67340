#include "advslam/dataset.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace advslam {

namespace {

struct ParsedLine {
    double timestamp = 0.0;
    std::vector<double> values;
    std::string trailing;  // first non-numeric payload token (file name)
};

// TUM list format: '#' comments, whitespace-separated columns, first column a
// timestamp in seconds.
std::vector<ParsedLine> parse_tum_list(const std::filesystem::path& file, int payload_numbers,
                                       bool payload_is_path) {
    std::ifstream in(file);
    if (!in) throw DataError("missing file: " + file.string());
    std::vector<ParsedLine> out;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream iss(line);
        ParsedLine p;
        if (!(iss >> p.timestamp) || !std::isfinite(p.timestamp) || p.timestamp < 0.0) {
            throw DataError(file.string() + ":" + std::to_string(line_no) + ": malformed timestamp");
        }
        if (payload_is_path) {
            if (!(iss >> p.trailing)) {
                throw DataError(file.string() + ":" + std::to_string(line_no) + ": missing file path");
            }
        } else {
            p.values.resize(payload_numbers);
            for (int i = 0; i < payload_numbers; ++i) {
                if (!(iss >> p.values[i]) || !std::isfinite(p.values[i])) {
                    throw DataError(file.string() + ":" + std::to_string(line_no) +
                                    ": malformed value in column " + std::to_string(i + 2));
                }
            }
        }
        out.push_back(std::move(p));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ParsedLine& a, const ParsedLine& b) { return a.timestamp < b.timestamp; });
    return out;
}

}  // namespace

std::vector<std::pair<int, int>> associate_timestamps(const std::vector<double>& a,
                                                      const std::vector<double>& b,
                                                      double tolerance_s) {
    struct Candidate {
        double dt;
        int i, j;
    };
    std::vector<Candidate> candidates;
    // b is sorted; only a band of b entries can fall within the tolerance.
    size_t lo = 0;
    for (int i = 0; i < static_cast<int>(a.size()); ++i) {
        while (lo < b.size() && b[lo] < a[i] - tolerance_s) ++lo;
        for (size_t j = lo; j < b.size() && b[j] <= a[i] + tolerance_s; ++j) {
            candidates.push_back({std::abs(a[i] - b[j]), i, static_cast<int>(j)});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.dt != y.dt) return x.dt < y.dt;
        if (x.i != y.i) return x.i < y.i;
        return x.j < y.j;
    });
    std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
    std::vector<std::pair<int, int>> pairs;
    for (const auto& c : candidates) {
        if (used_a[c.i] || used_b[c.j]) continue;
        used_a[c.i] = used_b[c.j] = 1;
        pairs.emplace_back(c.i, c.j);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

std::vector<GroundTruthEntry> load_tum_trajectory(const std::filesystem::path& path) {
    std::vector<GroundTruthEntry> out;
    for (const auto& p : parse_tum_list(path, 7, false)) {
        GroundTruthEntry e;
        e.timestamp = p.timestamp;
        e.pose.t = Eigen::Vector3d(p.values[0], p.values[1], p.values[2]);
        Eigen::Quaterniond q(p.values[6], p.values[3], p.values[4], p.values[5]);  // w, x, y, z
        if (q.norm() < 1e-12) throw DataError(path.string() + ": zero quaternion");
        q.normalize();
        e.pose.R = q.toRotationMatrix();
        out.push_back(e);
    }
    return out;
}

SequenceManifest load_tum_sequence(const std::filesystem::path& root, double tolerance_s) {
    SequenceManifest m;
    m.root = root;

    for (const auto& p : parse_tum_list(root / "rgb.txt", 0, true))
        m.rgb.push_back({p.timestamp, p.trailing});
    for (const auto& p : parse_tum_list(root / "depth.txt", 0, true))
        m.depth.push_back({p.timestamp, p.trailing});
    m.ground_truth = load_tum_trajectory(root / "groundtruth.txt");

    std::vector<double> rgb_ts, depth_ts, gt_ts;
    for (const auto& e : m.rgb) rgb_ts.push_back(e.timestamp);
    for (const auto& e : m.depth) depth_ts.push_back(e.timestamp);
    for (const auto& e : m.ground_truth) gt_ts.push_back(e.timestamp);

    std::vector<int> depth_for(rgb_ts.size(), -1), gt_for(rgb_ts.size(), -1);
    for (auto [i, j] : associate_timestamps(rgb_ts, depth_ts, tolerance_s)) depth_for[i] = j;
    for (auto [i, j] : associate_timestamps(rgb_ts, gt_ts, tolerance_s)) gt_for[i] = j;

    for (int i = 0; i < static_cast<int>(rgb_ts.size()); ++i) {
        if (depth_for[i] < 0) continue;  // RGB frames need a depth partner
        m.associations.push_back({i, depth_for[i], gt_for[i]});
    }
    if (m.associations.empty()) throw DataError(root.string() + ": zero rgb/depth associations");
    return m;
}

Box clamp_box(const Box& b, int frame_w, int frame_h) {
    const int x0 = std::clamp(b.x, 0, frame_w);
    const int y0 = std::clamp(b.y, 0, frame_h);
    const int x1 = std::clamp(b.x + b.w, 0, frame_w);
    const int y1 = std::clamp(b.y + b.h, 0, frame_h);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

void RegionSet::add(double timestamp, const Box& box) { by_timestamp_[timestamp].push_back(box); }

const std::vector<Box>& RegionSet::boxes_for(double ts) const {
    static const std::vector<Box> kEmpty;
    if (by_timestamp_.empty()) return kEmpty;
    constexpr double kKeyTolerance = 1e-4;
    auto it = by_timestamp_.lower_bound(ts);
    double best_dt = std::numeric_limits<double>::infinity();
    auto best = by_timestamp_.end();
    if (it != by_timestamp_.end() && std::abs(it->first - ts) < best_dt) {
        best_dt = std::abs(it->first - ts);
        best = it;
    }
    if (it != by_timestamp_.begin()) {
        --it;
        if (std::abs(it->first - ts) < best_dt) {
            best_dt = std::abs(it->first - ts);
            best = it;
        }
    }
    if (best == by_timestamp_.end() || best_dt > kKeyTolerance) return kEmpty;
    return best->second;
}

RegionSet load_regions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing region file: " + path.string());
    RegionSet regions;
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream iss(line);
        double ts;
        double x, y, w, h;
        if (!(iss >> ts >> x >> y >> w >> h)) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed region line");
        }
        if (w < 1 || h < 1) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": region dimensions must be >= 1");
        }
        regions.add(ts, Box{static_cast<int>(std::llround(x)), static_cast<int>(std::llround(y)),
                            static_cast<int>(std::llround(w)), static_cast<int>(std::llround(h))});
    }
    return regions;
}

// ---------------------------------------------------------------------------
// PNG I/O (libpng)
// ---------------------------------------------------------------------------

namespace {

struct PngReader {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    explicit PngReader(const std::filesystem::path& path) {
        fp = std::fopen(path.string().c_str(), "rb");
        if (!fp) throw DataError("cannot open PNG: " + path.string());
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            close();
            throw DataError("libpng init failed for " + path.string());
        }
    }
    ~PngReader() { close(); }
    void close() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
        png = nullptr;
        info = nullptr;
        fp = nullptr;
    }
};

struct PngWriter {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    explicit PngWriter(const std::filesystem::path& path) {
        fp = std::fopen(path.string().c_str(), "wb");
        if (!fp) throw DataError("cannot create PNG: " + path.string());
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            close();
            throw DataError("libpng init failed for " + path.string());
        }
    }
    ~PngWriter() { close(); }
    void close() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
        png = nullptr;
        info = nullptr;
        fp = nullptr;
    }
};

}  // namespace

ImageFrame decode_rgb(const std::filesystem::path& path) {
    PngReader r(path);
    if (setjmp(png_jmpbuf(r.png))) throw DataError("unreadable PNG: " + path.string());
    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    if (bit_depth != 8) {
        throw DataError(path.string() + ": expected 8-bit PNG, got " + std::to_string(bit_depth) +
                        "-bit");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    ImageFrame frame;
    frame.width = static_cast<int>(png_get_image_width(r.png, r.info));
    frame.height = static_cast<int>(png_get_image_height(r.png, r.info));
    frame.channels = static_cast<int>(png_get_channels(r.png, r.info));
    if (frame.channels != 1 && frame.channels != 3) {
        throw DataError(path.string() + ": unsupported channel count " +
                        std::to_string(frame.channels));
    }
    const size_t row_bytes = png_get_rowbytes(r.png, r.info);
    std::vector<uint8_t> raw(row_bytes * frame.height);
    std::vector<png_bytep> rows(frame.height);
    for (int y = 0; y < frame.height; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * row_bytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    frame.pixels.resize(static_cast<size_t>(frame.width) * frame.height * frame.channels);
    for (size_t i = 0; i < frame.pixels.size(); ++i) frame.pixels[i] = raw[i] / 255.0;
    return frame;
}

void encode_rgb(const ImageFrame& frame, const std::filesystem::path& path) {
    PngWriter w(path);
    if (setjmp(png_jmpbuf(w.png))) throw DataError("PNG write failed: " + path.string());
    png_init_io(w.png, w.fp);
    const int color_type = frame.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(w.png, w.info, frame.width, frame.height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    std::vector<uint8_t> row(static_cast<size_t>(frame.width) * frame.channels);
    for (int y = 0; y < frame.height; ++y) {
        for (size_t i = 0; i < row.size(); ++i) {
            const double v = frame.pixels[static_cast<size_t>(y) * row.size() + i];
            row[i] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
}

DepthFrame decode_depth(const std::filesystem::path& path, double depth_factor) {
    if (depth_factor <= 0) throw ConfigError("depth factor must be > 0");
    PngReader r(path);
    if (setjmp(png_jmpbuf(r.png))) throw DataError("unreadable PNG: " + path.string());
    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
        throw DataError(path.string() + ": depth PNG must be 16-bit grayscale");
    }
    // PNG stores 16-bit samples big-endian.
    png_set_swap(r.png);
    png_read_update_info(r.png, r.info);

    DepthFrame frame;
    frame.width = static_cast<int>(png_get_image_width(r.png, r.info));
    frame.height = static_cast<int>(png_get_image_height(r.png, r.info));
    std::vector<uint16_t> raw(static_cast<size_t>(frame.width) * frame.height);
    std::vector<png_bytep> rows(frame.height);
    for (int y = 0; y < frame.height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(raw.data() + static_cast<size_t>(y) * frame.width);
    }
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    frame.depth.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) frame.depth[i] = raw[i] / depth_factor;
    return frame;
}

void encode_depth(const DepthFrame& frame, const std::filesystem::path& path, double depth_factor) {
    if (depth_factor <= 0) throw ConfigError("depth factor must be > 0");
    PngWriter w(path);
    if (setjmp(png_jmpbuf(w.png))) throw DataError("PNG write failed: " + path.string());
    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, frame.width, frame.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    png_set_swap(w.png);

    std::vector<uint16_t> row(frame.width);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const double meters = frame.at(x, y);
            const double raw = std::clamp(meters * depth_factor, 0.0, 65535.0);
            row[x] = static_cast<uint16_t>(std::lround(raw));
        }
        png_write_row(w.png, reinterpret_cast<png_bytep>(row.data()));
    }
    png_write_end(w.png, nullptr);
}

}  // namespace advslam
