#include "ssr/config.hpp"

#include "ssr/simulate.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ssr {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

// Shortest text that parses back to the same double.
std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string aperture_section(std::size_t i) { return "aperture" + std::to_string(i); }

template <typename T>
void read_opt(const pt::ptree& tree, const std::string& key, T& value) {
    if (auto v = tree.get_optional<T>(key)) value = *v;
}

}  // namespace

PipelineConfig::PipelineConfig() : wavelengths_nm(cave_wavelengths()), filters(default_filters()) {}

std::vector<GeometricTransform> PipelineConfig::scene_transforms(std::uint64_t scene_seed) const {
    if (transform_mode == TransformMode::Explicit) return transforms;
    const auto grid = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(k_apertures()))));
    return lattice_transforms(grid, scene_seed, jitter);
}

void PipelineConfig::validate() const {
    if (r < 1) throw Error("config: r must be >= 1");
    if (filters.empty()) throw Error("config: no apertures defined");
    if (pan_index >= filters.size() || !filters[pan_index].is_panchromatic) {
        throw Error("config: pan_index must name a panchromatic aperture");
    }
    if (wavelengths_nm.empty()) throw Error("config: empty wavelength grid");
    for (std::size_t i = 1; i < wavelengths_nm.size(); ++i) {
        if (!(wavelengths_nm[i] > wavelengths_nm[i - 1])) {
            throw Error("config: wavelengths must be strictly increasing");
        }
    }
    for (const auto& f : filters) f.validate(wavelengths_nm);
    if (transform_mode == TransformMode::Explicit) {
        if (transforms.size() != filters.size()) {
            throw Error("config: explicit mode needs one transform per aperture");
        }
    } else {
        const auto grid = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(filters.size()))));
        if (grid * grid != filters.size()) {
            throw Error("config: lattice mode needs a square aperture count");
        }
        if (!(jitter >= 0.0 && jitter < 0.5)) throw Error("config: jitter must lie in [0, 0.5)");
    }
    params.validate();
    if (!(noise_sigma >= 0.0)) throw Error("config: noise_sigma must be non-negative");
    if (dict_sparsity < 1 || dict_iterations < 1 || dict_stride < 1 || dict_max_samples < 1) {
        throw Error("config: dictionary sparsity, iterations, stride and max_samples must be >= 1");
    }
    if (dataset_path.empty()) {
        if (synthetic_height < r || synthetic_width < r) {
            throw Error("config: synthetic size must be at least r");
        }
    }
}

std::vector<double> parse_wavelengths(const std::string& text) {
    const std::string t = trim(text);
    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        std::stringstream ss(t);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
            throw Error("config: wavelength range must be start:step:stop");
        }
        const double start = std::stod(a), step = std::stod(b), stop = std::stod(c);
        if (!(step > 0.0) || stop < start) throw Error("config: bad wavelength range " + t);
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) out.push_back(start + step * static_cast<double>(i));
        return out;
    }
    for (const auto& tok : split_list(t)) out.push_back(std::stod(tok));
    return out;
}

PipelineConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream is(text);
    PipelineConfig c;
    try {
        pt::read_ini(is, tree);

        if (auto p = tree.get_optional<std::string>("dataset.path")) c.dataset_path = trim(*p);
        if (auto s = tree.get_optional<std::string>("dataset.scenes")) c.scenes = split_list(*s);

        read_opt(tree, "synthetic.height", c.synthetic_height);
        read_opt(tree, "synthetic.width", c.synthetic_width);
        read_opt(tree, "synthetic.training_scenes", c.synthetic_training_scenes);

        read_opt(tree, "camera.r", c.r);
        read_opt(tree, "camera.pan_index", c.pan_index);
        if (auto w = tree.get_optional<std::string>("camera.wavelengths")) c.wavelengths_nm = parse_wavelengths(*w);
        if (auto k = tree.get_optional<std::string>("camera.decimation")) {
            if (trim(*k) == "box") c.kernel = DecimationKernel::BoxAverage;
            else if (trim(*k) == "point") c.kernel = DecimationKernel::PointSample;
            else throw Error("config: camera.decimation must be box or point");
        }

        if (auto m = tree.get_optional<std::string>("transforms.mode")) {
            if (trim(*m) == "lattice") c.transform_mode = TransformMode::Lattice;
            else if (trim(*m) == "explicit") c.transform_mode = TransformMode::Explicit;
            else throw Error("config: transforms.mode must be lattice or explicit");
        }
        read_opt(tree, "transforms.jitter", c.jitter);

        if (tree.get_child_optional(aperture_section(0))) {
            c.filters.clear();
            c.transforms.clear();
            for (std::size_t i = 0; tree.get_child_optional(aperture_section(i)); ++i) {
                const pt::ptree& a = tree.get_child(aperture_section(i));
                NotchFilter f;
                f.is_panchromatic = a.get<bool>("panchromatic", false);
                f.center_nm = a.get<double>("center_nm", 0.0);
                f.half_width_nm = a.get<double>("half_width_nm", 0.0);
                c.filters.push_back(f);
                GeometricTransform t;
                t.dx = a.get<double>("dx", 0.0);
                t.dy = a.get<double>("dy", 0.0);
                t.rotation_deg = a.get<double>("rotation_deg", 0.0);
                c.transforms.push_back(t);
            }
            if (c.transform_mode == TransformMode::Lattice) c.transforms.clear();
        }

        read_opt(tree, "masr.iterations", c.params.masr_iters);
        auto& ps = c.params.pansharpen;
        read_opt(tree, "pansharpen.lipschitz", ps.lipschitz);
        read_opt(tree, "pansharpen.t1", ps.t1);
        read_opt(tree, "pansharpen.gamma", ps.gamma);
        read_opt(tree, "pansharpen.iter_max", ps.iter_max);
        read_opt(tree, "pansharpen.rel_tol", ps.rel_tol);
        read_opt(tree, "pansharpen.momentum", ps.momentum);
        read_opt(tree, "pansharpen.monotone", ps.monotone);
        auto& sp = c.params.specrecon;
        read_opt(tree, "specrecon.rho1", sp.rho1);
        read_opt(tree, "specrecon.rho2", sp.rho2);
        read_opt(tree, "specrecon.eta_tv", sp.eta_tv);
        read_opt(tree, "specrecon.eta", sp.eta);
        read_opt(tree, "specrecon.iter_max", sp.iter_max);
        read_opt(tree, "vtv.inner_iters", c.params.vtv.inner_iters);
        read_opt(tree, "vtv.dual_step", c.params.vtv.dual_step);
        read_opt(tree, "vtv.warm_start", c.params.vtv.warm_start);

        if (auto p = tree.get_optional<std::string>("dictionary.path")) c.dictionary_path = trim(*p);
        if (auto p = tree.get_optional<std::string>("dictionary.cache_dir")) c.dictionary_cache_dir = trim(*p);
        read_opt(tree, "dictionary.sparsity", c.dict_sparsity);
        read_opt(tree, "dictionary.iterations", c.dict_iterations);
        read_opt(tree, "dictionary.stride", c.dict_stride);
        read_opt(tree, "dictionary.max_samples", c.dict_max_samples);
        read_opt(tree, "dictionary.atoms", c.dict_atoms);
        if (auto s = tree.get_optional<std::string>("dictionary.train_scenes")) c.dict_train_scenes = split_list(*s);

        if (auto p = tree.get_optional<std::string>("run.output")) c.output_dir = trim(*p);
        read_opt(tree, "run.seed", c.seed);
        read_opt(tree, "run.noise_sigma", c.noise_sigma);
        read_opt(tree, "run.crop", c.crop);
        read_opt(tree, "run.write_images", c.write_images);
    } catch (const pt::ptree_error& e) {
        throw Error(std::string("config: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw Error("config: malformed number");
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return parse_config(os.str());
}

std::string to_text(const PipelineConfig& c) {
    std::ostringstream os;
    os << "[dataset]\n";
    os << "path = " << c.dataset_path.string() << "\n";
    os << "scenes = " << join(c.scenes) << "\n\n";
    os << "[synthetic]\n";
    os << "height = " << c.synthetic_height << "\n";
    os << "width = " << c.synthetic_width << "\n";
    os << "training_scenes = " << c.synthetic_training_scenes << "\n\n";
    os << "[camera]\n";
    os << "r = " << c.r << "\n";
    os << "pan_index = " << c.pan_index << "\n";
    std::vector<std::string> wl;
    for (double v : c.wavelengths_nm) wl.push_back(num(v));
    os << "wavelengths = " << join(wl) << "\n";
    os << "decimation = " << (c.kernel == DecimationKernel::BoxAverage ? "box" : "point") << "\n\n";
    os << "[transforms]\n";
    os << "mode = " << (c.transform_mode == TransformMode::Lattice ? "lattice" : "explicit") << "\n";
    os << "jitter = " << num(c.jitter) << "\n\n";
    for (std::size_t i = 0; i < c.filters.size(); ++i) {
        const auto& f = c.filters[i];
        os << "[" << aperture_section(i) << "]\n";
        os << "panchromatic = " << (f.is_panchromatic ? "true" : "false") << "\n";
        os << "center_nm = " << num(f.center_nm) << "\n";
        os << "half_width_nm = " << num(f.half_width_nm) << "\n";
        if (i < c.transforms.size()) {
            os << "dx = " << num(c.transforms[i].dx) << "\n";
            os << "dy = " << num(c.transforms[i].dy) << "\n";
            os << "rotation_deg = " << num(c.transforms[i].rotation_deg) << "\n";
        }
        os << "\n";
    }
    const auto& p = c.params;
    os << "[masr]\niterations = " << p.masr_iters << "\n\n";
    os << "[pansharpen]\n";
    os << "lipschitz = " << num(p.pansharpen.lipschitz) << "\n";
    os << "t1 = " << num(p.pansharpen.t1) << "\n";
    os << "gamma = " << num(p.pansharpen.gamma) << "\n";
    os << "iter_max = " << p.pansharpen.iter_max << "\n";
    os << "rel_tol = " << num(p.pansharpen.rel_tol) << "\n";
    os << "momentum = " << (p.pansharpen.momentum ? "true" : "false") << "\n";
    os << "monotone = " << (p.pansharpen.monotone ? "true" : "false") << "\n\n";
    os << "[specrecon]\n";
    os << "rho1 = " << num(p.specrecon.rho1) << "\n";
    os << "rho2 = " << num(p.specrecon.rho2) << "\n";
    os << "eta_tv = " << num(p.specrecon.eta_tv) << "\n";
    os << "eta = " << num(p.specrecon.eta) << "\n";
    os << "iter_max = " << p.specrecon.iter_max << "\n\n";
    os << "[vtv]\n";
    os << "inner_iters = " << p.vtv.inner_iters << "\n";
    os << "dual_step = " << num(p.vtv.dual_step) << "\n";
    os << "warm_start = " << (p.vtv.warm_start ? "true" : "false") << "\n\n";
    os << "[dictionary]\n";
    os << "path = " << c.dictionary_path.string() << "\n";
    os << "cache_dir = " << c.dictionary_cache_dir.string() << "\n";
    os << "sparsity = " << c.dict_sparsity << "\n";
    os << "iterations = " << c.dict_iterations << "\n";
    os << "stride = " << c.dict_stride << "\n";
    os << "max_samples = " << c.dict_max_samples << "\n";
    os << "atoms = " << c.dict_atoms << "\n";
    os << "train_scenes = " << join(c.dict_train_scenes) << "\n\n";
    os << "[run]\n";
    os << "output = " << c.output_dir.string() << "\n";
    os << "seed = " << c.seed << "\n";
    os << "noise_sigma = " << num(c.noise_sigma) << "\n";
    os << "crop = " << c.crop << "\n";
    os << "write_images = " << (c.write_images ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace ssr
