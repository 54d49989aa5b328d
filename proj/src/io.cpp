#include "roadprop/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace roadprop {

namespace {

struct PngRead {
    std::FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    ~PngRead() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWrite {
    std::FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;

    ~PngWrite() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void open_read(PngRead& ctx, const std::filesystem::path& path) {
    ctx.fp = std::fopen(path.string().c_str(), "rb");
    if (!ctx.fp) throw IoError("cannot open " + path.string());
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError("not a PNG file: " + path.string());
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (ctx.png) ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw IoError("libpng initialization failed");
}

void open_write(PngWrite& ctx, const std::filesystem::path& path) {
    ctx.fp = std::fopen(path.string().c_str(), "wb");
    if (!ctx.fp) throw IoError("cannot open " + path.string() + " for writing");
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (ctx.png) ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw IoError("libpng initialization failed");
}

// Reads any PNG as 8-bit grayscale; alpha is stripped, anything colored is
// rejected.
Grid<std::uint8_t> read_gray8(const std::filesystem::path& path) {
    PngRead ctx;
    open_read(ctx, path);
    Grid<std::uint8_t> out;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("malformed PNG: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(ctx.png, ctx.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA)
        throw IoError(path.string() + ": expected 8-bit grayscale PNG");
    if (bit_depth != 8)
        throw IoError(path.string() + ": expected 8-bit grayscale PNG, got bit depth " +
                      std::to_string(bit_depth));
    if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(ctx.png);
    png_set_interlace_handling(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    out = Grid<std::uint8_t>(static_cast<int>(w), static_cast<int>(h));
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.data.data() + static_cast<std::size_t>(y) * w;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return out;
}

void write_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& img) {
    PngWrite ctx;
    open_write(ctx, path);
    std::vector<png_bytep> rows(img.height);

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width);
    png_write_image(ctx.png, rows.data());
    png_write_end(ctx.png, nullptr);
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
    PngRead ctx;
    open_read(ctx, path);
    RasterImage img;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("malformed PNG: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(ctx.png, ctx.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    if (bit_depth == 16) png_set_strip_16(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_set_interlace_handling(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    if (png_get_channels(ctx.png, ctx.info) != 3 || png_get_bit_depth(ctx.png, ctx.info) != 8)
        throw IoError(path.string() + ": cannot normalize to 8-bit RGB");

    static_assert(sizeof(Rgb8) == 3, "Rgb8 must be packed");
    img = RasterImage(static_cast<int>(w), static_cast<int>(h));
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * w);
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return img;
}

void write_image(const std::filesystem::path& path, const RasterImage& img) {
    if (img.width < 1 || img.height < 1) throw IoError("write_image: empty image");
    PngWrite ctx;
    open_write(ctx, path);
    std::vector<png_bytep> rows(img.height);

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(
            reinterpret_cast<const png_byte*>(img.data.data() + static_cast<std::size_t>(y) * img.width));
    png_write_image(ctx.png, rows.data());
    png_write_end(ctx.png, nullptr);
}

BinaryMask read_binary_mask(const std::filesystem::path& path) {
    Grid<std::uint8_t> raw = read_gray8(path);
    BinaryMask mask(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        if (raw.data[i] == 0)
            mask.data[i] = 0;
        else if (raw.data[i] == 255)
            mask.data[i] = 1;
        else
            throw IoError(path.string() + ": invalid binary mask value " +
                          std::to_string(raw.data[i]));
    }
    return mask;
}

void write_binary_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    Grid<std::uint8_t> raw(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i) raw.data[i] = mask.data[i] ? 255 : 0;
    write_gray8(path, raw);
}

TriStateMask read_tristate_mask(const std::filesystem::path& path) {
    Grid<std::uint8_t> raw = read_gray8(path);
    TriStateMask mask(raw.width, raw.height);
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        switch (raw.data[i]) {
            case 0: mask.data[i] = TriState::NonRoad; break;
            case 128: mask.data[i] = TriState::Unknown; break;
            case 255: mask.data[i] = TriState::Road; break;
            default:
                throw IoError(path.string() + ": invalid tri-state value " +
                              std::to_string(raw.data[i]));
        }
    }
    return mask;
}

void write_tristate_mask(const std::filesystem::path& path, const TriStateMask& mask) {
    Grid<std::uint8_t> raw(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        switch (mask.data[i]) {
            case TriState::NonRoad: raw.data[i] = 0; break;
            case TriState::Unknown: raw.data[i] = 128; break;
            case TriState::Road: raw.data[i] = 255; break;
        }
    }
    write_gray8(path, raw);
}

Grid<std::uint16_t> read_label_map(const std::filesystem::path& path) {
    PngRead ctx;
    open_read(ctx, path);
    Grid<std::uint16_t> out;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("malformed PNG: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    png_get_IHDR(ctx.png, ctx.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16)
        throw IoError(path.string() + ": expected 16-bit grayscale PNG");
    if constexpr (std::endian::native == std::endian::little) png_set_swap(ctx.png);
    png_set_interlace_handling(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    out = Grid<std::uint16_t>(static_cast<int>(w), static_cast<int>(h));
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(out.data.data() + static_cast<std::size_t>(y) * w);
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return out;
}

void write_label_map(const std::filesystem::path& path, const Grid<std::uint16_t>& labels) {
    PngWrite ctx;
    open_write(ctx, path);
    std::vector<png_bytep> rows(labels.height);

    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("PNG write failed: " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, labels.width, labels.height, 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    if constexpr (std::endian::native == std::endian::little) png_set_swap(ctx.png);
    for (int y = 0; y < labels.height; ++y)
        rows[y] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(
            labels.data.data() + static_cast<std::size_t>(y) * labels.width));
    png_write_image(ctx.png, rows.data());
    png_write_end(ctx.png, nullptr);
}

namespace {

constexpr char kF32Magic[4] = {'F', '3', '2', 'M'};

void put_u32le(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

FloatField read_f32(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kF32Magic, 4) != 0)
        throw IoError(path.string() + ": bad F32M magic");
    const std::uint32_t h = get_u32le(is);
    const std::uint32_t w = get_u32le(is);
    if (!is || w == 0 || h == 0 || w > (1u << 24) || h > (1u << 24))
        throw IoError(path.string() + ": bad F32M header");
    FloatField out(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const std::uint32_t bits = get_u32le(is);
        if (!is) throw IoError(path.string() + ": truncated F32M payload");
        out.data[i] = std::bit_cast<float>(bits);
    }
    return out;
}

void write_f32(const std::filesystem::path& path, const FloatField& field) {
    if (field.width < 1 || field.height < 1) throw IoError("write_f32: empty field");
    for (float v : field.data)
        if (!std::isfinite(v)) throw IoError("write_f32: non-finite value");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(kF32Magic, 4);
    put_u32le(os, static_cast<std::uint32_t>(field.height));
    put_u32le(os, static_cast<std::uint32_t>(field.width));
    for (float v : field.data) put_u32le(os, std::bit_cast<std::uint32_t>(v));
    if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace roadprop
