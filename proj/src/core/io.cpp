#include "core/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace mpf {

namespace {

void write_f32le(std::ostream& os, const std::vector<double>& values) {
    std::vector<unsigned char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        float f = static_cast<float>(values[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        buf[4 * i + 0] = static_cast<unsigned char>(bits & 0xFF);
        buf[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
        buf[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
        buf[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f32le(std::istream& is, std::size_t count,
                               const std::string& ctx) {
    std::vector<unsigned char> buf(count * 4);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(is.gcount()) != buf.size())
        fail(ErrorCode::Io, ctx + ": truncated payload");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(buf[4 * i + 0]) |
                             (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                             (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                             (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f))
            fail(ErrorCode::Numeric, ctx + ": file contains non-finite values");
        out[i] = static_cast<double>(f);
    }
    return out;
}

// Header line reader that tracks line numbers for error context.
struct HeaderReader {
    std::istream& is;
    std::string path;
    int line_no = 0;

    std::string context() const { return path + ":" + std::to_string(line_no); }

    std::string next_line() {
        std::string line;
        if (!std::getline(is, line))
            fail(ErrorCode::Io, path + ": unexpected end of header");
        ++line_no;
        return line;
    }

    // Expects `key tok tok ...`; returns the tokens after the key.
    std::vector<std::string> keyword_line(const std::string& key, std::size_t n_tokens) {
        auto toks = split_tokens(next_line());
        if (toks.empty() || toks[0] != key)
            fail(ErrorCode::Io, context() + ": expected '" + key + "' line");
        if (n_tokens != 0 && toks.size() != n_tokens + 1)
            fail(ErrorCode::Io, context() + ": '" + key + "' expects " +
                                    std::to_string(n_tokens) + " value(s)");
        return {toks.begin() + 1, toks.end()};
    }

    void blank_line() {
        if (!next_line().empty())
            fail(ErrorCode::Io, context() + ": expected blank line before payload");
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorCode::Io, path + ": cannot open for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(ErrorCode::Io, path + ": cannot open for reading");
    return is;
}

void expect_eof(std::istream& is, const std::string& path) {
    char c;
    if (is.read(&c, 1) && is.gcount() == 1)
        fail(ErrorCode::Io, path + ": trailing bytes after payload");
}

} // namespace

void write_volume(const Volume& v, const std::string& path) {
    v.validate("write_volume");
    v.ensure_finite("write_volume");
    auto os = open_out(path);
    os << "MPFVOL1\n";
    os << "dims " << v.grid.dims[0] << " " << v.grid.dims[1] << " " << v.grid.dims[2]
       << "\n";
    os << "spacing " << format_double(v.grid.spacing[0]) << " "
       << format_double(v.grid.spacing[1]) << " " << format_double(v.grid.spacing[2])
       << "\n";
    os << "dtype f32le\n\n";
    write_f32le(os, v.values);
    if (!os)
        fail(ErrorCode::Io, path + ": write failed");
}

Volume read_volume(const std::string& path) {
    auto is = open_in(path);
    HeaderReader h{is, path};
    if (h.next_line() != "MPFVOL1")
        fail(ErrorCode::Io, path + ":1: bad magic, expected MPFVOL1");
    auto dims = h.keyword_line("dims", 3);
    auto spacing = h.keyword_line("spacing", 3);
    auto dtype = h.keyword_line("dtype", 1);
    if (dtype[0] != "f32le")
        fail(ErrorCode::Io, h.context() + ": unsupported dtype '" + dtype[0] + "'");
    h.blank_line();

    Volume v;
    for (int a = 0; a < 3; ++a) {
        v.grid.dims[a] = static_cast<int>(parse_int(dims[a], path + ": dims"));
        v.grid.spacing[a] = parse_double(spacing[a], path + ": spacing");
    }
    v.grid.validate(path);
    v.values = read_f32le(is, v.grid.voxel_count(), path);
    expect_eof(is, path);
    return v;
}

void write_sinogram(const Sinogram& s, const std::string& path) {
    s.validate();
    auto os = open_out(path);
    os << "MPFSIN1\n";
    os << "views " << s.geom.n_views << "\n";
    os << "rows " << s.geom.n_det_rows << "\n";
    os << "cols " << s.geom.n_det_cols << "\n";
    os << "pitch " << format_double(s.geom.det_pitch) << "\n";
    os << "angles";
    for (double a : s.geom.angles)
        os << " " << format_double(a);
    os << "\n\n";
    write_f32le(os, s.values);
    write_f32le(os, s.weights);
    if (!os)
        fail(ErrorCode::Io, path + ": write failed");
}

Sinogram read_sinogram(const std::string& path) {
    auto is = open_in(path);
    HeaderReader h{is, path};
    if (h.next_line() != "MPFSIN1")
        fail(ErrorCode::Io, path + ":1: bad magic, expected MPFSIN1");
    ScanGeometry g;
    g.n_views = static_cast<int>(parse_int(h.keyword_line("views", 1)[0], path + ": views"));
    g.n_det_rows = static_cast<int>(parse_int(h.keyword_line("rows", 1)[0], path + ": rows"));
    g.n_det_cols = static_cast<int>(parse_int(h.keyword_line("cols", 1)[0], path + ": cols"));
    g.det_pitch = parse_double(h.keyword_line("pitch", 1)[0], path + ": pitch");
    auto angle_toks = h.keyword_line("angles", 0);
    g.angles.reserve(angle_toks.size());
    for (const auto& t : angle_toks)
        g.angles.push_back(parse_double(t, path + ": angles"));
    h.blank_line();

    g.validate();
    Sinogram s(g);
    s.values = read_f32le(is, g.ray_count(), path);
    s.weights = read_f32le(is, g.ray_count(), path);
    expect_eof(is, path);
    s.validate();
    return s;
}

} // namespace mpf
