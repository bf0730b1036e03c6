#include "icolor/imageio.hpp"

#include <png.h>
#include <jpeglib.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace icolor {

namespace {

std::uint8_t to_u8(float v) {
    const float c = std::min(1.0f, std::max(0.0f, v));
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

struct PngReadCtx {
    const Bytes* bytes;
    size_t pos = 0;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t count) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->pos + count > ctx->bytes->size()) png_error(png, "png: truncated stream");
    std::memcpy(out, ctx->bytes->data() + ctx->pos, count);
    ctx->pos += count;
}

void png_write_fn(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_fn(png_structp) {}

// Decodes any PNG to 8-bit RGB rows (16-bit content is scaled down).
std::vector<std::uint8_t> decode_png_rgb8(const Bytes& bytes, int& h, int& w) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    PngReadCtx ctx{&bytes};
    std::vector<std::uint8_t> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: decode failed");
    }
    png_set_read_fn(png, &ctx, png_read_fn);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    h = static_cast<int>(png_get_image_height(png, info));
    w = static_cast<int>(png_get_image_width(png, info));
    pixels.resize(static_cast<size_t>(h) * w * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return pixels;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

std::vector<std::uint8_t> decode_jpeg_rgb8(const Bytes& bytes, int& h, int& w) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("jpeg: decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), bytes.size());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    h = static_cast<int>(cinfo.output_height);
    w = static_cast<int>(cinfo.output_width);
    std::vector<std::uint8_t> pixels(static_cast<size_t>(h) * w * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = pixels.data() + static_cast<size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return pixels;
}

RgbImage rgb_from_rows(const std::vector<std::uint8_t>& pixels, int h, int w) {
    RgbImage img(h, w);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = pixels.data() + static_cast<size_t>(y) * w * 3;
        for (int x = 0; x < w; ++x) {
            img.r(y, x) = row[3 * x + 0] / 255.0f;
            img.g(y, x) = row[3 * x + 1] / 255.0f;
            img.b(y, x) = row[3 * x + 2] / 255.0f;
        }
    }
    return img;
}

Bytes encode_png_impl(const std::uint8_t* rows, int h, int w, int channels, int bit_depth) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    Bytes out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png: encode failed");
    }
    png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
    const int color = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, w, h, bit_depth, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const size_t stride = static_cast<size_t>(w) * channels * (bit_depth / 8);
    std::vector<png_bytep> row_ptrs(h);
    for (int y = 0; y < h; ++y) row_ptrs[y] = const_cast<png_bytep>(rows + y * stride);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace

bool looks_like_png(const Bytes& bytes) {
    static const std::uint8_t sig[4] = {0x89, 'P', 'N', 'G'};
    return bytes.size() >= 4 && std::memcmp(bytes.data(), sig, 4) == 0;
}

bool looks_like_jpeg(const Bytes& bytes) {
    return bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8;
}

RgbImage decode_image(const Bytes& bytes) {
    int h = 0, w = 0;
    std::vector<std::uint8_t> pixels;
    if (looks_like_png(bytes)) {
        pixels = decode_png_rgb8(bytes, h, w);
    } else if (looks_like_jpeg(bytes)) {
        pixels = decode_jpeg_rgb8(bytes, h, w);
    } else {
        throw std::runtime_error("decode_image: not a PNG or JPEG stream");
    }
    return rgb_from_rows(pixels, h, w);
}

RgbImage load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

Bytes encode_png(const RgbImage& img) {
    const int h = img.height(), w = img.width();
    require(h >= 1 && w >= 1, "encode_png: empty image");
    std::vector<std::uint8_t> rows(static_cast<size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* row = rows.data() + static_cast<size_t>(y) * w * 3;
        for (int x = 0; x < w; ++x) {
            row[3 * x + 0] = to_u8(img.r(y, x));
            row[3 * x + 1] = to_u8(img.g(y, x));
            row[3 * x + 2] = to_u8(img.b(y, x));
        }
    }
    return encode_png_impl(rows.data(), h, w, 3, 8);
}

void save_png(const std::filesystem::path& path, const RgbImage& img) { write_file(path, encode_png(img)); }

Bytes encode_jpeg(const RgbImage& img, int quality) {
    const int h = img.height(), w = img.width();
    require(h >= 1 && w >= 1, "encode_jpeg: empty image");
    std::vector<std::uint8_t> rows(static_cast<size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* row = rows.data() + static_cast<size_t>(y) * w * 3;
        for (int x = 0; x < w; ++x) {
            row[3 * x + 0] = to_u8(img.r(y, x));
            row[3 * x + 1] = to_u8(img.g(y, x));
            row[3 * x + 2] = to_u8(img.b(y, x));
        }
    }
    jpeg_compress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    unsigned char* buf = nullptr;
    unsigned long buf_size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        free(buf);
        throw std::runtime_error("jpeg: encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &buf_size);
    cinfo.image_width = w;
    cinfo.image_height = h;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = rows.data() + static_cast<size_t>(cinfo.next_scanline) * w * 3;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    Bytes out(buf, buf + buf_size);
    free(buf);
    return out;
}

void save_jpeg(const std::filesystem::path& path, const RgbImage& img, int quality) {
    write_file(path, encode_jpeg(img, quality));
}

Bytes encode_gray_png(const Plane& plane) {
    const int h = static_cast<int>(plane.rows()), w = static_cast<int>(plane.cols());
    require(h >= 1 && w >= 1, "encode_gray_png: empty plane");
    std::vector<std::uint8_t> rows(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) rows[static_cast<size_t>(y) * w + x] = to_u8(plane(y, x));
    return encode_png_impl(rows.data(), h, w, 1, 8);
}

void save_gray_png(const std::filesystem::path& path, const Plane& plane) {
    write_file(path, encode_gray_png(plane));
}

Plane load_gray_png(const std::filesystem::path& path) {
    const RgbImage img = load_image(path);
    // decode promotes gray to rgb with equal channels
    return img.r;
}

Bytes encode_label_png(const LabelMap& labels) {
    const int h = static_cast<int>(labels.rows()), w = static_cast<int>(labels.cols());
    require(h >= 1 && w >= 1, "encode_label_png: empty map");
    require((labels >= 0).all() && (labels <= 65535).all(), "encode_label_png: label outside [0,65535]");
    std::vector<std::uint8_t> rows(static_cast<size_t>(h) * w * 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint16_t v = static_cast<std::uint16_t>(labels(y, x));
            // PNG is big-endian
            rows[(static_cast<size_t>(y) * w + x) * 2 + 0] = static_cast<std::uint8_t>(v >> 8);
            rows[(static_cast<size_t>(y) * w + x) * 2 + 1] = static_cast<std::uint8_t>(v & 0xFF);
        }
    }
    return encode_png_impl(rows.data(), h, w, 1, 16);
}

void save_label_png(const std::filesystem::path& path, const LabelMap& labels) {
    write_file(path, encode_label_png(labels));
}

LabelMap decode_label_png(const Bytes& bytes) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png: allocation failure");
    }
    PngReadCtx ctx{&bytes};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png: label decode failed");
    }
    png_set_read_fn(png, &ctx, png_read_fn);
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("decode_label_png: expected single-channel PNG");
    }
    const int depth = png_get_bit_depth(png, info);
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int bytes_per = depth == 16 ? 2 : 1;
    std::vector<std::uint8_t> pixels(static_cast<size_t>(h) * w * bytes_per);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * w * bytes_per;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    LabelMap labels(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (bytes_per == 2) {
                const size_t i = (static_cast<size_t>(y) * w + x) * 2;
                labels(y, x) = (pixels[i] << 8) | pixels[i + 1];
            } else {
                labels(y, x) = pixels[static_cast<size_t>(y) * w + x];
            }
        }
    }
    return labels;
}

LabelMap load_label_png(const std::filesystem::path& path) { return decode_label_png(read_file(path)); }

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace icolor
