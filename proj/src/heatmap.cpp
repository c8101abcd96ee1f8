#include "mlescape/heatmap.hpp"

#include "mlescape/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace mlescape {

namespace {

// Control points of Moreland's cool-warm map, evenly spaced in t.
constexpr std::array<std::array<double, 3>, 9> kCoolWarm{{
    {59, 76, 192},
    {98, 130, 234},
    {141, 176, 254},
    {184, 208, 249},
    {221, 221, 221},
    {245, 196, 173},
    {244, 154, 123},
    {222, 96, 77},
    {180, 4, 38},
}};

} // namespace

std::array<std::uint8_t, 3> coolwarm(double t)
{
    t = std::clamp(std::isnan(t) ? 0.0 : t, 0.0, 1.0);
    const double x = t * (kCoolWarm.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(x), kCoolWarm.size() - 2);
    const double f = x - static_cast<double>(i);
    std::array<std::uint8_t, 3> rgb{};
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<std::uint8_t>(std::lround((1 - f) * kCoolWarm[i][c] + f * kCoolWarm[i + 1][c]));
    return rgb;
}

void write_heatmap_png(const std::filesystem::path& file, std::span<const double> values, int nx, int ny,
                       ColorScale scale, int cell_px)
{
    if (nx <= 0 || ny <= 0 || cell_px <= 0 || values.size() != static_cast<std::size_t>(nx) * ny)
        throw Error(ErrorKind::OutOfDomain, "heatmap dimensions do not match the data");
    const double span = scale.hi > scale.lo ? scale.hi - scale.lo : 1.0;
    const int width = nx * cell_px;
    const int height = ny * cell_px;

    std::vector<png_byte> image(static_cast<std::size_t>(width) * height * 3);
    for (int j = 0; j < ny; ++j) {
        const int row0 = (ny - 1 - j) * cell_px; // bottom data row at the bottom of the image
        for (int i = 0; i < nx; ++i) {
            const double x = values[static_cast<std::size_t>(j) * nx + i];
            const auto rgb = std::isnan(x) ? std::array<std::uint8_t, 3>{0, 0, 0} : coolwarm((x - scale.lo) / span);
            for (int dy = 0; dy < cell_px; ++dy) {
                png_byte* px = &image[(static_cast<std::size_t>(row0 + dy) * width + i * cell_px) * 3];
                for (int dx = 0; dx < cell_px; ++dx, px += 3)
                    std::copy(rgb.begin(), rgb.end(), px);
            }
        }
    }

    std::error_code ec;
    if (file.has_parent_path())
        std::filesystem::create_directories(file.parent_path(), ec);
    std::filesystem::path tmp = file;
    tmp += ".tmp";
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(tmp.c_str(), "wb"), &std::fclose);
    if (!fp)
        throw Error(ErrorKind::IoError, "cannot open " + tmp.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "PNG encoding failed for " + file.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < height; ++r)
        png_write_row(png, &image[static_cast<std::size_t>(r) * width * 3]);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    fp.reset();

    std::filesystem::rename(tmp, file, ec);
    if (ec)
        throw Error(ErrorKind::IoError, "cannot move PNG into place at " + file.string());
}

void write_field_png(const std::filesystem::path& file, const FieldTable& field, ColorScale scale, int cell_px)
{
    write_heatmap_png(file, field.values, field.n_v(), field.n_w(), scale, cell_px);
}

} // namespace mlescape
