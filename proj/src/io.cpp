#include "kto/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "kto/errors.hpp"

namespace fs = std::filesystem;

namespace kto {

namespace {

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
    throw IoFailure(path.string() + ": " + what);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) io_fail(path, "read error");
    return std::move(ss).str();
}

void append_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64le(std::string& out, double v) {
    append_u64le(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
public:
    ByteReader(const std::string& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

    std::uint32_t u32le() { return static_cast<std::uint32_t>(raw(4)); }
    std::uint64_t u64le() { return raw(8); }
    double f64le() { return std::bit_cast<double>(raw(8)); }

    void expect_magic(const char* magic, std::size_t len) {
        if (bytes_.size() - pos_ < len || std::memcmp(bytes_.data() + pos_, magic, len) != 0) {
            throw ParseError(path_.string() + ": bad magic, not a KTO1 file");
        }
        pos_ += len;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::uint64_t raw(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw ParseError(path_.string() + ": truncated file");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += n;
        return v;
    }

    const std::string& bytes_;
    const fs::path& path_;
    std::size_t pos_ = 0;
};

std::string format_double(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) io_fail(tmp, "cannot open for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out.good()) io_fail(tmp, "write error");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) io_fail(path, "rename failed: " + ec.message());
}

std::string file_hash_hex(const fs::path& path) {
    const std::string bytes = read_file(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

SnapshotSet load_csv(const fs::path& path, bool header, std::optional<double> dt) {
    std::ifstream in(path);
    if (!in) io_fail(path, "cannot open for reading");
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (header && lineno == 1) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t ncols = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (true) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": malformed number");
            }
            if (!std::isfinite(v)) {
                throw NonFinite(path.string() + ":" + std::to_string(lineno) +
                                ": non-finite value");
            }
            data.push_back(v);
            ++ncols;
            p = next;
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            if (*p != ',') {
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": expected comma");
            }
            ++p;
        }
        if (cols == 0) {
            cols = ncols;
        } else if (ncols != cols) {
            throw ShapeMismatch(path.string() + ":" + std::to_string(lineno) + ": row has " +
                                std::to_string(ncols) + " values, expected " +
                                std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(path.string() + ": no data rows");
    return SnapshotSet({cols}, rows, std::move(data), dt);
}

void save_csv(const SnapshotSet& set, const fs::path& path, bool header) {
    std::string out;
    const std::size_t d = set.dim();
    if (header) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out += ',';
            out += "c" + std::to_string(j);
        }
        out += '\n';
    }
    for (std::size_t i = 0; i < set.count(); ++i) {
        const auto row = set.snapshot(i);
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out += ',';
            out += format_double(row[static_cast<Eigen::Index>(j)]);
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// KTO1 binary tensor format
// ---------------------------------------------------------------------------

SnapshotSet load_kto1(const fs::path& path, std::optional<double> dt) {
    const std::string bytes = read_file(path);
    ByteReader r(bytes, path);
    r.expect_magic("KTO1", 4);
    const std::uint32_t rank = r.u32le();
    if (rank == 0 || rank > 32) throw ParseError(path.string() + ": implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    std::size_t dim = 1;
    for (auto& s : shape) {
        s = static_cast<std::size_t>(r.u64le());
        if (s == 0) throw ParseError(path.string() + ": zero-sized dimension");
        dim *= s;
    }
    const std::size_t count = static_cast<std::size_t>(r.u64le());
    std::vector<double> data(count * dim);
    for (auto& v : data) {
        v = r.f64le();
        if (!std::isfinite(v)) throw NonFinite(path.string() + ": non-finite value");
    }
    if (!r.at_end()) throw ParseError(path.string() + ": trailing bytes");
    return SnapshotSet(std::move(shape), count, std::move(data), dt);
}

void save_kto1(const SnapshotSet& set, const fs::path& path) {
    std::string out;
    out.reserve(4 + 4 + 8 * set.shape().size() + 8 + 8 * set.data().size());
    out += "KTO1";
    append_u32le(out, static_cast<std::uint32_t>(set.shape().size()));
    for (std::size_t s : set.shape()) append_u64le(out, static_cast<std::uint64_t>(s));
    append_u64le(out, static_cast<std::uint64_t>(set.count()));
    for (double v : set.data()) append_f64le(out, v);
    write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// PGM (P5) / PPM (P6) image sequences
// ---------------------------------------------------------------------------

namespace {

struct PnmHeader {
    bool color = false;
    std::size_t width = 0, height = 0;
    std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::string& bytes, const fs::path& path) {
    PnmHeader h;
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw ParseError(path.string() + ": not a binary PGM/PPM file");
    }
    h.color = bytes[1] == '6';
    std::size_t pos = 2;
    auto next_token = [&]() -> std::size_t {
        // Skip whitespace and '#' comments, then parse one unsigned integer.
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t v = 0;
        auto [next, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), v);
        if (ec != std::errc()) throw ParseError(path.string() + ": malformed PNM header");
        pos = static_cast<std::size_t>(next - bytes.data());
        return v;
    };
    h.width = next_token();
    h.height = next_token();
    const std::size_t maxval = next_token();
    if (h.width == 0 || h.height == 0) throw ParseError(path.string() + ": zero image size");
    if (maxval != 255) throw ParseError(path.string() + ": only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw ParseError(path.string() + ": malformed PNM header");
    }
    h.data_offset = pos + 1;
    return h;
}

void load_image_into(const fs::path& path, std::vector<double>& data,
                     std::vector<std::size_t>& shape, bool& first) {
    const std::string bytes = read_file(path);
    const PnmHeader h = parse_pnm_header(bytes, path);
    const std::size_t channels = h.color ? 3 : 1;
    const std::size_t npix = h.width * h.height * channels;
    if (bytes.size() - h.data_offset < npix) throw ParseError(path.string() + ": truncated pixels");
    std::vector<std::size_t> this_shape =
        h.color ? std::vector<std::size_t>{h.height, h.width, 3}
                : std::vector<std::size_t>{h.height, h.width};
    if (first) {
        shape = this_shape;
        first = false;
    } else if (shape != this_shape) {
        throw ShapeMismatch(path.string() + ": frame shape differs from previous frames");
    }
    for (std::size_t i = 0; i < npix; ++i) {
        data.push_back(static_cast<double>(
            static_cast<unsigned char>(bytes[h.data_offset + i])));
    }
}

}  // namespace

SnapshotSet load_image(const fs::path& path) {
    std::vector<double> data;
    std::vector<std::size_t> shape;
    bool first = true;
    load_image_into(path, data, shape, first);
    return SnapshotSet(std::move(shape), 1, std::move(data));
}

SnapshotSet load_image_dir(const fs::path& dir, std::optional<double> dt) {
    if (!fs::is_directory(dir)) io_fail(dir, "not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
    }
    if (files.empty()) throw ParseError(dir.string() + ": no .pgm/.ppm files found");
    std::sort(files.begin(), files.end());
    std::vector<double> data;
    std::vector<std::size_t> shape;
    bool first = true;
    for (const auto& f : files) load_image_into(f, data, shape, first);
    return SnapshotSet(std::move(shape), files.size(), std::move(data), dt);
}

void save_image(const SnapshotSet& set, std::size_t index, const fs::path& path) {
    const auto& shape = set.shape();
    const bool gray = shape.size() == 2;
    const bool color = shape.size() == 3 && shape[2] == 3;
    if (!gray && !color) {
        throw UnsupportedShape("save_image: shape must be [h, w] or [h, w, 3]");
    }
    if (index >= set.count()) throw InvalidArgument("save_image: index out of range");
    const std::size_t h = shape[0], w = shape[1];
    std::string out;
    out += color ? "P6\n" : "P5\n";
    out += std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    const auto snap = set.snapshot(index);
    for (Eigen::Index i = 0; i < snap.size(); ++i) {
        const double v = snap[i];
        if (!(v >= 0.0 && v <= 255.0)) {
            throw UnsupportedShape("save_image: pixel value " + format_double(v) +
                                   " outside [0, 255]");
        }
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
    write_file_atomic(path, out);
}

void save_image_dir(const SnapshotSet& set, const fs::path& dir, const std::string& prefix) {
    const auto& shape = set.shape();
    const bool color = shape.size() == 3 && shape[2] == 3;
    if (shape.size() != 2 && !color) {
        throw UnsupportedShape("save_image_dir: shape must be [h, w] or [h, w, 3]");
    }
    fs::create_directories(dir);
    const char* ext = color ? ".ppm" : ".pgm";
    for (std::size_t i = 0; i < set.count(); ++i) {
        char num[16];
        std::snprintf(num, sizeof(num), "%05zu", i);
        save_image(set, i, dir / (prefix + num + ext));
    }
}

SnapshotSet load_snapshots_auto(const fs::path& path, std::optional<double> dt) {
    if (fs::is_directory(path)) return load_image_dir(path, dt);
    const std::string ext = path.extension().string();
    if (ext == ".csv") return load_csv(path, false, dt);
    if (ext == ".pgm" || ext == ".ppm") {
        SnapshotSet s = load_image(path);
        return SnapshotSet(s.shape(), s.count(), s.data(), dt);
    }
    return load_kto1(path, dt);
}

}  // namespace kto
