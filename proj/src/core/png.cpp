#include "core/png.hpp"

#include <cmath>
#include <fstream>

#include "core/error.hpp"

namespace mpf {

namespace {

std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* data, std::size_t n) {
    static std::uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        init = true;
    }
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i)
        crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
    put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    std::uint32_t crc = crc32_update(0, out.data() + crc_start, out.size() - crc_start);
    put_u32_be(out, crc);
}

// zlib stream with stored deflate blocks.
std::vector<std::uint8_t> zlib_stored(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> z;
    z.push_back(0x78); // CMF: 32k window, deflate
    z.push_back(0x01); // FLG: check bits, no dict, fastest
    std::size_t pos = 0;
    do {
        std::size_t chunk = std::min<std::size_t>(raw.size() - pos, 65535);
        bool last = pos + chunk == raw.size();
        z.push_back(last ? 0x01 : 0x00); // BFINAL + BTYPE=00 (stored)
        z.push_back(static_cast<std::uint8_t>(chunk & 0xFF));
        z.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xFF));
        z.push_back(static_cast<std::uint8_t>(~chunk & 0xFF));
        z.push_back(static_cast<std::uint8_t>((~chunk >> 8) & 0xFF));
        z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + chunk);
        pos += chunk;
    } while (pos < raw.size());
    // adler32 of the raw data
    std::uint32_t a = 1, b = 0;
    for (std::uint8_t byte : raw) {
        a = (a + byte) % 65521;
        b = (b + a) % 65521;
    }
    put_u32_be(z, (b << 16) | a);
    return z;
}

} // namespace

void write_png_gray8(const std::string& path, int width, int height,
                     const std::vector<std::uint8_t>& pixels) {
    if (width < 1 || height < 1 ||
        pixels.size() != static_cast<std::size_t>(width) * height)
        fail(ErrorCode::Dimension, "write_png_gray8: pixel buffer size mismatch");

    std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(width));
    put_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // grayscale
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // no interlace
    append_chunk(png, "IHDR", ihdr);

    // filter byte 0 before each scanline
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (width + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + static_cast<std::size_t>(y) * width,
                   pixels.begin() + static_cast<std::size_t>(y + 1) * width);
    }
    append_chunk(png, "IDAT", zlib_stored(raw));
    append_chunk(png, "IEND", {});

    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorCode::Io, path + ": cannot open for writing");
    os.write(reinterpret_cast<const char*>(png.data()),
             static_cast<std::streamsize>(png.size()));
    if (!os)
        fail(ErrorCode::Io, path + ": write failed");
}

std::vector<std::uint8_t> window_slice(const Volume& v, int axis, int index,
                                       double window_min, double window_max,
                                       int& width, int& height) {
    v.validate("window_slice");
    if (axis < 0 || axis > 2)
        fail(ErrorCode::Config, "slice axis must be 0 (x), 1 (y) or 2 (z)");
    if (index < 0 || index >= v.grid.dims[axis])
        fail(ErrorCode::Config, "slice index " + std::to_string(index) +
                                    " out of range [0, " +
                                    std::to_string(v.grid.dims[axis]) + ")");
    if (!(window_min < window_max))
        fail(ErrorCode::Config, "window minimum must be strictly below the maximum");

    // In-plane axes in (column, row) order.
    int ca = axis == 0 ? 1 : 0;
    int ra = axis == 2 ? 1 : 2;
    width = v.grid.dims[ca];
    height = v.grid.dims[ra];
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    const double scale = 255.0 / (window_max - window_min);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            int idx3[3];
            idx3[axis] = index;
            idx3[ca] = c;
            idx3[ra] = r;
            double val = v.at(idx3[0], idx3[1], idx3[2]);
            double g = (val - window_min) * scale;
            g = std::min(std::max(g, 0.0), 255.0);
            pixels[static_cast<std::size_t>(r) * width + c] =
                static_cast<std::uint8_t>(std::lround(g));
        }
    return pixels;
}

void export_png(const Volume& v, int axis, int index, double window_min,
                double window_max, const std::string& path) {
    int w = 0, h = 0;
    auto pixels = window_slice(v, axis, index, window_min, window_max, w, h);
    write_png_gray8(path, w, h, pixels);
}

} // namespace mpf
