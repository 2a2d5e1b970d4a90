#include "ssr/io.hpp"

#include "binary_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace ssr {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".tif" || ext == ".tiff" || ext == ".bmp" || ext == ".pgm";
}

std::vector<fs::path> band_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    }
    if (files.empty()) {
        // CAVE archives unpack as <scene>/<scene>/*.png
        for (const auto& e : fs::directory_iterator(dir)) {
            if (!e.is_directory()) continue;
            for (const auto& f : fs::directory_iterator(e.path())) {
                if (f.is_regular_file() && is_image_file(f.path())) files.push_back(f.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

cv::Mat read_single_channel(const fs::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
    if (img.empty()) {
        throw Error("cannot read image " + path.string());
    }
    if (img.channels() > 1) {
        std::vector<cv::Mat> planes;
        cv::split(img, planes);
        img = planes.front();
    }
    return img;
}

BandImage to_band(const cv::Mat& img, const fs::path& path) {
    double scale = 0.0;
    switch (img.depth()) {
        case CV_8U: scale = 1.0 / 255.0; break;
        case CV_16U: scale = 1.0 / 65535.0; break;
        default: throw Error("unsupported sample depth in " + path.string());
    }
    cv::Mat f;
    img.convertTo(f, CV_64F, scale);
    BandImage out(static_cast<std::size_t>(f.rows), static_cast<std::size_t>(f.cols));
    for (int y = 0; y < f.rows; ++y) {
        const double* row = f.ptr<double>(y);
        std::copy(row, row + f.cols, out.data.begin() + static_cast<std::ptrdiff_t>(y) * f.cols);
    }
    return out;
}

}  // namespace

CubeFile CubeFile::from_cube(const SpectralCube& cube) {
    CubeFile f;
    f.wavelengths_nm = cube.wavelengths();
    f.height = cube.height();
    f.width = cube.width();
    f.data.assign(cube.data().begin(), cube.data().end());
    return f;
}

CubeFile CubeFile::from_field(const MultiBandField& field, std::vector<double> wavelengths_nm) {
    if (wavelengths_nm.size() != field.bands) {
        throw Error("CubeFile: wavelength count does not match band count");
    }
    CubeFile f;
    f.wavelengths_nm = std::move(wavelengths_nm);
    f.height = field.height;
    f.width = field.width;
    f.data.assign(field.data.begin(), field.data.end());
    return f;
}

SpectralCube CubeFile::to_cube() const {
    return SpectralCube(wavelengths_nm, height, width, std::vector<double>(data.begin(), data.end()));
}

MultiBandField CubeFile::to_field() const {
    MultiBandField f(q_bands(), height, width);
    std::copy(data.begin(), data.end(), f.data.begin());
    return f;
}

void write_cube_file(const fs::path& path, const CubeFile& file) {
    if (file.data.size() != file.q_bands() * file.height * file.width) {
        throw Error("write_cube_file: payload does not match header");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Error("write_cube_file: cannot open " + path.string());
    }
    os.write("SSRC", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(file.q_bands()));
    detail::put_u32(os, static_cast<std::uint32_t>(file.height));
    detail::put_u32(os, static_cast<std::uint32_t>(file.width));
    for (double wl : file.wavelengths_nm) detail::put_f64(os, wl);
    for (float v : file.data) detail::put_f32(os, v);
    if (!os) {
        throw Error("write_cube_file: write failed for " + path.string());
    }
}

CubeFile read_cube_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("read_cube_file: cannot open " + path.string());
    }
    char magic[4] = {};
    std::uint32_t q = 0, h = 0, w = 0;
    if (!is.read(magic, 4) || std::string(magic, 4) != "SSRC" || !detail::get_u32(is, q) ||
        !detail::get_u32(is, h) || !detail::get_u32(is, w)) {
        throw Error("read_cube_file: bad header in " + path.string());
    }
    CubeFile f;
    f.height = h;
    f.width = w;
    f.wavelengths_nm.resize(q);
    for (double& wl : f.wavelengths_nm) {
        if (!detail::get_f64(is, wl)) throw Error("read_cube_file: truncated header in " + path.string());
    }
    f.data.resize(static_cast<std::size_t>(q) * h * w);
    for (float& v : f.data) {
        if (!detail::get_f32(is, v)) throw Error("read_cube_file: truncated payload in " + path.string());
        if (!std::isfinite(v)) throw Error("read_cube_file: non-finite sample in " + path.string());
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw Error("read_cube_file: trailing bytes in " + path.string());
    }
    return f;
}

SpectralCube load_cave_scene(const fs::path& dir, const CaveLoadOptions& options) {
    if (!fs::is_directory(dir)) {
        throw Error("load_cave_scene: not a directory: " + dir.string());
    }
    const std::vector<fs::path> files = band_files(dir);
    const std::size_t nb = options.expected_bands;

    // Files named *_NN.ext carry their band number; use it to name gaps.
    static const std::regex numbered(R"(_(\d+)\.[A-Za-z]+$)");
    std::map<std::size_t, fs::path> by_index;
    for (const auto& f : files) {
        std::smatch m;
        const std::string name = f.filename().string();
        if (std::regex_search(name, m, numbered)) by_index[std::stoul(m[1].str())] = f;
    }
    if (files.size() != nb) {
        std::ostringstream os;
        os << "load_cave_scene: " << dir.string() << " has " << files.size() << " band images, expected "
           << nb;
        if (by_index.size() == files.size()) {
            for (std::size_t i = 1; i <= nb; ++i) {
                if (!by_index.count(i)) {
                    os << "; missing band " << i << " ("
                       << options.first_wavelength_nm + options.wavelength_step_nm * static_cast<double>(i - 1)
                       << " nm)";
                    break;
                }
            }
        }
        throw Error(os.str());
    }
    std::vector<fs::path> ordered = files;
    if (by_index.size() == nb && by_index.begin()->first == 1 && by_index.rbegin()->first == nb) {
        ordered.clear();
        for (const auto& [i, p] : by_index) ordered.push_back(p);
    }

    std::vector<BandImage> bands;
    bands.reserve(nb);
    for (const auto& f : ordered) {
        BandImage b = to_band(read_single_channel(f), f);
        if (!bands.empty() && (b.height != bands.front().height || b.width != bands.front().width)) {
            throw Error("load_cave_scene: inconsistent dimensions in " + f.string());
        }
        bands.push_back(std::move(b));
    }
    const std::size_t h = bands.front().height;
    const std::size_t w = bands.front().width;
    if (options.crop > 0 && (options.crop > h || options.crop > w)) {
        std::ostringstream os;
        os << "load_cave_scene: " << h << "x" << w << " frame is smaller than the " << options.crop
           << " crop";
        throw Error(os.str());
    }
    if (options.crop > 0 && (options.crop < h || options.crop < w)) {
        const std::size_t y0 = (h - options.crop) / 2;
        const std::size_t x0 = (w - options.crop) / 2;
        for (auto& b : bands) {
            BandImage c(options.crop, options.crop);
            for (std::size_t y = 0; y < options.crop; ++y) {
                for (std::size_t x = 0; x < options.crop; ++x) c.at(y, x) = b.at(y0 + y, x0 + x);
            }
            b = std::move(c);
        }
    }
    std::vector<double> wl(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        wl[i] = options.first_wavelength_nm + options.wavelength_step_nm * static_cast<double>(i);
    }
    return SpectralCube::from_bands(std::move(wl), bands);
}

std::vector<fs::path> list_cave_scenes(const fs::path& root) {
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) {
        throw Error("list_cave_scenes: not a directory: " + root.string());
    }
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory() && !band_files(e.path()).empty()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_png(const fs::path& path, const BandImage& img) {
    cv::Mat m(static_cast<int>(img.height), static_cast<int>(img.width), CV_8U);
    for (std::size_t y = 0; y < img.height; ++y) {
        auto* row = m.ptr<unsigned char>(static_cast<int>(y));
        for (std::size_t x = 0; x < img.width; ++x) {
            row[x] = static_cast<unsigned char>(std::lround(std::clamp(img.at(y, x), 0.0, 1.0) * 255.0));
        }
    }
    if (!cv::imwrite(path.string(), m)) {
        throw Error("write_png: cannot write " + path.string());
    }
}

BandImage read_gray_image(const fs::path& path) {
    return to_band(read_single_channel(path), path);
}

void write_stack(const fs::path& dir, const ApertureStack& stack) {
    stack.validate();
    fs::create_directories(dir);
    namespace pt = boost::property_tree;
    pt::ptree tree;
    tree.put("stack.r", stack.r);
    tree.put("stack.apertures", stack.size());
    std::ostringstream wl;
    wl.precision(17);
    for (std::size_t i = 0; i < stack.wavelengths_nm.size(); ++i) {
        wl << (i ? "," : "") << stack.wavelengths_nm[i];
    }
    tree.put("stack.wavelengths", wl.str());
    for (const auto& c : stack.captures) {
        const std::string sec = "aperture" + std::to_string(c.aperture_index) + ".";
        const std::string file = "aperture" + std::to_string(c.aperture_index) + ".ssrc";
        auto put = [&](const std::string& key, double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            tree.put(sec + key, os.str());
        };
        tree.put(sec + "panchromatic", c.filter.is_panchromatic);
        put("center_nm", c.filter.center_nm);
        put("half_width_nm", c.filter.half_width_nm);
        put("dx", c.transform.dx);
        put("dy", c.transform.dy);
        put("rotation_deg", c.transform.rotation_deg);
        tree.put(sec + "file", file);
        MultiBandField f(1, c.image.height, c.image.width);
        f.set_band(0, c.image);
        write_cube_file(dir / file, CubeFile::from_field(f, {0.0}));
    }
    pt::write_ini((dir / "stack.ini").string(), tree);
}

ApertureStack read_stack(const fs::path& dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini((dir / "stack.ini").string(), tree);
        ApertureStack stack;
        stack.r = tree.get<std::size_t>("stack.r");
        const auto k = tree.get<std::size_t>("stack.apertures");
        std::stringstream wl(tree.get<std::string>("stack.wavelengths"));
        for (std::string tok; std::getline(wl, tok, ',');) stack.wavelengths_nm.push_back(std::stod(tok));
        for (std::size_t i = 0; i < k; ++i) {
            const std::string sec = "aperture" + std::to_string(i) + ".";
            ApertureCapture c;
            c.aperture_index = i;
            c.filter.is_panchromatic = tree.get<bool>(sec + "panchromatic");
            c.filter.center_nm = tree.get<double>(sec + "center_nm");
            c.filter.half_width_nm = tree.get<double>(sec + "half_width_nm");
            c.transform.dx = tree.get<double>(sec + "dx");
            c.transform.dy = tree.get<double>(sec + "dy");
            c.transform.rotation_deg = tree.get<double>(sec + "rotation_deg");
            const CubeFile f = read_cube_file(dir / tree.get<std::string>(sec + "file"));
            if (f.q_bands() != 1) {
                throw Error("read_stack: aperture file must hold one band");
            }
            c.image = f.to_field().band_image(0);
            stack.captures.push_back(std::move(c));
        }
        stack.validate();
        return stack;
    } catch (const pt::ptree_error& e) {
        throw Error(std::string("read_stack: ") + e.what());
    }
}

GeometricTransform register_translation(const BandImage& reference, const BandImage& moving) {
    if (reference.height != moving.height || reference.width != moving.width) {
        throw Error("register_translation: image shapes differ");
    }
    auto to_mat = [](const BandImage& img) {
        cv::Mat m(static_cast<int>(img.height), static_cast<int>(img.width), CV_64F);
        std::copy(img.data.begin(), img.data.end(), m.ptr<double>(0));
        return m;
    };
    const cv::Point2d s = cv::phaseCorrelate(to_mat(reference), to_mat(moving));
    GeometricTransform t;
    t.dx = -std::round(s.x);
    t.dy = -std::round(s.y);
    // Avoid reporting -0.
    t.dx += 0.0;
    t.dy += 0.0;
    return t;
}

}  // namespace ssr
