#include "esia/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

namespace esia {

namespace {

void check_dimensions(int width, int height) {
    if (width < 2 || height < 2) {
        raise(ErrorKind::InvalidArgument,
              "image must be at least 2x2, got " + std::to_string(width) +
                  "x" + std::to_string(height));
    }
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---- PPM (P6, maxval 255) ----

int ppm_next_token(std::FILE* f, std::string& token) {
    token.clear();
    int c = std::fgetc(f);
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = std::fgetc(f);
        } else if (std::isspace(c)) {
            c = std::fgetc(f);
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        token.push_back(static_cast<char>(c));
        c = std::fgetc(f);
    }
    return token.empty() ? EOF : 0;
}

RgbImage load_ppm(std::FILE* f, const std::filesystem::path& path) {
    std::string tok;
    // magic already sniffed; consume it
    if (ppm_next_token(f, tok) == EOF || tok != "P6") {
        raise(ErrorKind::CorruptFile, path.string() + ": bad PPM magic");
    }
    long width = 0, height = 0, maxval = 0;
    auto read_int = [&](long& out) {
        if (ppm_next_token(f, tok) == EOF) {
            raise(ErrorKind::CorruptFile, path.string() + ": truncated PPM header");
        }
        try {
            out = std::stol(tok);
        } catch (const std::exception&) {
            raise(ErrorKind::CorruptFile, path.string() + ": bad PPM header field '" + tok + "'");
        }
    };
    read_int(width);
    read_int(height);
    read_int(maxval);
    if (maxval != 255) {
        raise(ErrorKind::UnsupportedFormat,
              path.string() + ": PPM maxval " + std::to_string(maxval) +
                  " (only 8-bit supported)");
    }
    if (width <= 0 || height <= 0 || width > 1 << 20 || height > 1 << 20) {
        raise(ErrorKind::CorruptFile, path.string() + ": implausible PPM size");
    }
    check_dimensions(static_cast<int>(width), static_cast<int>(height));
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * 3);
    if (std::fread(data.data(), 1, data.size(), f) != data.size()) {
        raise(ErrorKind::CorruptFile, path.string() + ": truncated PPM pixel data");
    }
    return RgbImage(static_cast<int>(width), static_cast<int>(height),
                    std::move(data));
}

void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) raise(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                               std::to_string(img.height()) + "\n255\n";
    if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size() ||
        std::fwrite(img.data().data(), 1, img.data().size(), f.get()) !=
            img.data().size()) {
        raise(ErrorKind::IoError, "short write to " + path.string());
    }
    if (std::fflush(f.get()) != 0) {
        raise(ErrorKind::IoError, "flush failed for " + path.string());
    }
}

// ---- PNG via libpng ----

struct PngReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriteGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteGuard() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

RgbImage load_png(std::FILE* f, const std::filesystem::path& path) {
    PngReadGuard g;
    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
    if (!g.png) raise(ErrorKind::IoError, "libpng init failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) raise(ErrorKind::IoError, "libpng init failed");

    if (setjmp(png_jmpbuf(g.png))) {
        raise(ErrorKind::CorruptFile, path.string() + ": invalid PNG stream");
    }
    png_init_io(g.png, f);
    png_read_info(g.png, g.info);

    const png_uint_32 width = png_get_image_width(g.png, g.info);
    const png_uint_32 height = png_get_image_height(g.png, g.info);
    const int bit_depth = png_get_bit_depth(g.png, g.info);
    const int color_type = png_get_color_type(g.png, g.info);

    if (bit_depth != 8) {
        raise(ErrorKind::UnsupportedFormat,
              path.string() + ": " + std::to_string(bit_depth) +
                  "-bit PNG (only 8-bit RGB supported)");
    }
    if (color_type != PNG_COLOR_TYPE_RGB) {
        raise(ErrorKind::UnsupportedFormat,
              path.string() + ": PNG color type " + std::to_string(color_type) +
                  " (only 8-bit RGB, no alpha/palette/gray)");
    }
    check_dimensions(static_cast<int>(width), static_cast<int>(height));

    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * 3);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 r = 0; r < height; ++r) {
        rows[r] = data.data() + static_cast<std::size_t>(r) * width * 3;
    }
    png_read_image(g.png, rows.data());
    png_read_end(g.png, nullptr);
    return RgbImage(static_cast<int>(width), static_cast<int>(height),
                    std::move(data));
}

void save_png(const RgbImage& img, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) raise(ErrorKind::IoError, "cannot open " + path.string() + " for writing");

    PngWriteGuard g;
    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
    if (!g.png) raise(ErrorKind::IoError, "libpng init failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) raise(ErrorKind::IoError, "libpng init failed");

    if (setjmp(png_jmpbuf(g.png))) {
        raise(ErrorKind::IoError, path.string() + ": PNG write failed");
    }
    png_init_io(g.png, f.get());
    // Fixed settings keep the encoder deterministic across runs.
    png_set_compression_level(g.png, 6);
    png_set_filter(g.png, 0, PNG_ALL_FILTERS);
    png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(g.png, g.info);

    std::vector<png_const_bytep> rows(img.height());
    for (int r = 0; r < img.height(); ++r) {
        rows[r] = img.data().data() + static_cast<std::size_t>(r) * img.width() * 3;
    }
    png_write_image(g.png, const_cast<png_bytepp>(rows.data()));
    png_write_end(g.png, nullptr);
    if (std::fflush(f.get()) != 0) {
        raise(ErrorKind::IoError, "flush failed for " + path.string());
    }
}

}  // namespace

RgbImage::RgbImage(int width, int height)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height * 3, 0) {
    check_dimensions(width, height);
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dimensions(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height * 3) {
        raise(ErrorKind::InvalidArgument,
              "pixel buffer size does not match " + std::to_string(width) +
                  "x" + std::to_string(height) + "x3");
    }
}

std::uint8_t RgbImage::at(PixelCoord p, int channel) const {
    if (!contains(p) || channel < 0 || channel > 2) {
        raise(ErrorKind::OutOfRange,
              "pixel (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                  ") channel " + std::to_string(channel) + " out of bounds");
    }
    return (*this)(p.row, p.col, channel);
}

void RgbImage::set(PixelCoord p, int channel, std::uint8_t value) {
    if (!contains(p) || channel < 0 || channel > 2) {
        raise(ErrorKind::OutOfRange,
              "pixel (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                  ") channel " + std::to_string(channel) + " out of bounds");
    }
    (*this)(p.row, p.col, channel) = value;
}

RgbImage load_image(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) {
        raise(ErrorKind::NotFound, "cannot open " + path.string());
    }
    unsigned char magic[8] = {};
    const std::size_t got = std::fread(magic, 1, sizeof magic, f.get());
    std::rewind(f.get());
    if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) {
        return load_png(f.get(), path);
    }
    if (got >= 2 && magic[0] == 'P' && magic[1] == '6') {
        return load_ppm(f.get(), path);
    }
    raise(ErrorKind::UnsupportedFormat,
          path.string() + ": not a PNG or binary PPM file");
}

void save_image(const RgbImage& img, const std::filesystem::path& path) {
    if (path.extension() == ".ppm") {
        save_ppm(img, path);
    } else {
        save_png(img, path);
    }
}

}  // namespace esia
