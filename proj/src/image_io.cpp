#include "hde/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <string>

#include "hde/errors.hpp"

namespace hde {
namespace fs = std::filesystem;

namespace {

std::uint8_t quantize(double v)
{
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in)
{
    std::string token;
    int ch = 0;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    return token;
}

int parse_header_int(std::istream& in, const fs::path& path, const char* what)
{
    const std::string token = next_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size() || value <= 0) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw DataError(path.string() + ": bad PGM " + what + " '" + token + "'");
    }
}

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image resize_bilinear(const Image& src, int out_height, int out_width)
{
    if (src.height <= 0 || src.width <= 0) throw std::invalid_argument("cannot resize empty image");
    if (out_height <= 0 || out_width <= 0) throw std::invalid_argument("resize target must be positive");
    Image out(out_height, out_width);
    const double sy = out_height > 1 ? static_cast<double>(src.height - 1) / (out_height - 1) : 0.0;
    const double sx = out_width > 1 ? static_cast<double>(src.width - 1) / (out_width - 1) : 0.0;
    for (int r = 0; r < out_height; ++r) {
        const double y = r * sy;
        const int y0 = std::min(static_cast<int>(std::floor(y)), src.height - 1);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = y - y0;
        for (int c = 0; c < out_width; ++c) {
            const double x = c * sx;
            const int x0 = std::min(static_cast<int>(std::floor(x)), src.width - 1);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double fx = x - x0;
            const double top = src.at(y0, x0) + fx * (src.at(y0, x1) - src.at(y0, x0));
            const double bottom = src.at(y1, x0) + fx * (src.at(y1, x1) - src.at(y1, x0));
            double v = top + fy * (bottom - top);
            // Convex combination, but guard against rounding past the corners.
            const auto [lo, hi] = std::minmax({src.at(y0, x0), src.at(y0, x1), src.at(y1, x0),
                                               src.at(y1, x1)});
            out.at(r, c) = std::clamp(v, lo, hi);
        }
    }
    return out;
}

Image read_pgm(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string() + ": cannot open file");
    if (next_token(in) != "P5") throw DataError(path.string() + ": not a binary PGM (P5)");
    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval > 65535) throw DataError(path.string() + ": PGM maxval exceeds 65535");
    // next_token consumed exactly one whitespace byte after maxval.
    const std::size_t bytes_per_pixel = maxval > 255 ? 2 : 1;
    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<unsigned char> raw(count * bytes_per_pixel);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw DataError(path.string() + ": truncated PGM pixel data");
    }
    Image image(height, width);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned value = bytes_per_pixel == 1
                                   ? raw[i]
                                   : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        if (value > static_cast<unsigned>(maxval)) {
            throw DataError(path.string() + ": pixel value exceeds maxval");
        }
        image.pixels[i] = static_cast<double>(value) / maxval;
    }
    return image;
}

void write_pgm(const fs::path& path, const Image& image)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    std::vector<char> raw(image.pixels.size());
    std::transform(image.pixels.begin(), image.pixels.end(), raw.begin(),
                   [](double v) { return static_cast<char>(quantize(v)); });
    out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError(path.string() + ": write failed");
}

void write_ppm(const fs::path& path, const RgbImage& image)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()),
              static_cast<std::streamsize>(image.rgb.size()));
    if (!out) throw DataError(path.string() + ": write failed");
}

Image read_png(const fs::path& path)
{
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw DataError(path.string() + ": cannot open file");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError(path.string() + ": libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError(path.string() + ": libpng init failed");
    }
    Image image;
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError(path.string() + ": corrupt PNG");
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_expand(png);
    png_set_packing(png);
    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);
    const auto width = static_cast<int>(png_get_image_width(png, info));
    const auto height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    const int channels = png_get_channels(png, info);
    buffer.resize(rowbytes * static_cast<std::size_t>(height));
    rows.resize(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) rows[r] = buffer.data() + rowbytes * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    image = Image(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            image.at(r, c) = rows[r][static_cast<std::size_t>(c) * channels] / 255.0;
    return image;
}

void write_png(const fs::path& path, const Image& image)
{
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw DataError(path.string() + ": cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError(path.string() + ": libpng init failed");
    }
    std::vector<png_byte> buffer(image.pixels.size());
    std::transform(image.pixels.begin(), image.pixels.end(), buffer.begin(), quantize);
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
    for (int r = 0; r < image.height; ++r)
        rows[r] = buffer.data() + static_cast<std::size_t>(r) * image.width;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError(path.string() + ": PNG write failed");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_image(const fs::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    throw DataError(path.string() + ": unsupported image extension '" + ext + "'");
}

std::vector<LabeledSample> load_image_dir(const fs::path& root, int input_side)
{
    if (input_side <= 0) throw ConfigError("input_side must be positive");
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw DataError(root.string() + ": not a directory");

    std::vector<fs::path> label_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        if (name != "pos" && name != "neg") {
            throw DataError(entry.path().string() + ": unknown label directory (expected pos or neg)");
        }
        label_dirs.push_back(entry.path());
    }
    // "neg" sorts before "pos".
    std::sort(label_dirs.begin(), label_dirs.end());

    std::vector<LabeledSample> samples;
    for (const fs::path& dir : label_dirs) {
        const Label label = dir.filename() == "pos" ? Label::positive : Label::negative;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        std::set<std::pair<std::string, int>> seen;
        for (const fs::path& file : files) {
            const std::string stem = file.stem().string();
            const auto underscore = stem.rfind('_');
            int slice = -1;
            if (underscore != std::string::npos && underscore > 0 &&
                underscore + 1 < stem.size()) {
                const std::string digits = stem.substr(underscore + 1);
                if (std::all_of(digits.begin(), digits.end(),
                                [](unsigned char c) { return std::isdigit(c); }) &&
                    digits.size() < 9) {
                    slice = std::stoi(digits);
                }
            }
            if (slice < 0) {
                throw DataError(file.string() + ": file name must be <subject>_<slice>.<ext>");
            }
            LabeledSample sample;
            sample.subject_id = stem.substr(0, underscore);
            sample.slice_index = slice;
            sample.label = label;
            if (!seen.emplace(sample.subject_id, slice).second) {
                throw DataError(file.string() + ": duplicate slice for subject '" +
                                sample.subject_id + "'");
            }
            Image image = read_image(file);
            if (image.height != input_side || image.width != input_side) {
                image = resize_bilinear(image, input_side, input_side);
            }
            sample.payload = std::move(image);
            samples.push_back(std::move(sample));
        }
    }
    if (samples.empty()) throw DataError(root.string() + ": no samples found");
    return samples;
}

}  // namespace hde
