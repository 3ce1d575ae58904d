#pragma once

// File formats:
//  * PGM (P5, 8- or 16-bit) for images; magnitude images are linearly scaled
//    and the scale recorded by the caller.
//  * Raw complex binary: 16-byte header = magic "FNCX" (4 bytes), uint32
//    ndim, uint32 dim0, uint32 dim1 (dim1 = 1 for 1-D), then interleaved
//    re/im little-endian float64.
//  * LevelModel JSON {"M":[...],"s":[...],"w":[...]}.
//  * SamplingScheme JSON {"kind","r","d","seed","m_per_band","indices"}.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sampling.hpp"

namespace firenet {

using nlohmann::json;

// ----------------------------------------------------------------- PGM -----

struct PgmImage {
    std::size_t width = 0, height = 0;
    int maxval = 255;
    std::vector<std::uint16_t> pixels;  // row-major
};

inline void write_pgm(const std::string& path, const PgmImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
    os << "P5\n" << img.width << " " << img.height << "\n" << img.maxval << "\n";
    if (img.maxval < 256) {
        for (auto p : img.pixels) os.put(static_cast<char>(p & 0xFF));
    } else {
        for (auto p : img.pixels) {
            os.put(static_cast<char>((p >> 8) & 0xFF));
            os.put(static_cast<char>(p & 0xFF));
        }
    }
}

inline PgmImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
    auto next_token = [&is]() {
        std::string t;
        while (is >> t) {
            if (t[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return t;
        }
        throw std::runtime_error("read_pgm: truncated header");
    };
    PgmImage img;
    img.width = std::stoul(next_token());
    img.height = std::stoul(next_token());
    img.maxval = std::stoi(next_token());
    is.get();  // single whitespace after maxval
    img.pixels.resize(img.width * img.height);
    if (img.maxval < 256) {
        std::vector<char> buf(img.pixels.size());
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!is) throw std::runtime_error("read_pgm: truncated data");
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] = static_cast<std::uint8_t>(buf[i]);
    } else {
        std::vector<char> buf(img.pixels.size() * 2);
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!is) throw std::runtime_error("read_pgm: truncated data");
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] = static_cast<std::uint16_t>(
                (static_cast<std::uint8_t>(buf[2 * i]) << 8) |
                static_cast<std::uint8_t>(buf[2 * i + 1]));
    }
    return img;
}

/// Magnitude image -> PGM with linear scaling; returns the scale used
/// (pixel = round(|value| * scale)).
inline double magnitude_to_pgm(const std::string& path, const ComplexTensor& t,
                               int maxval = 65535) {
    if (t.ndim() != 2 && t.ndim() != 1)
        throw std::invalid_argument("magnitude_to_pgm: 1-D or 2-D only");
    PgmImage img;
    img.height = t.ndim() == 2 ? t.dims[0] : 1;
    img.width = t.ndim() == 2 ? t.dims[1] : t.dims[0];
    img.maxval = maxval;
    double mx = 0.0;
    for (const auto& v : t.data) mx = std::max(mx, std::abs(v));
    double scale = mx > 0 ? maxval / mx : 1.0;
    img.pixels.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        double p = std::abs(t.data[i]) * scale;
        img.pixels[i] = static_cast<std::uint16_t>(std::min<double>(maxval, std::lround(p)));
    }
    write_pgm(path, img);
    return scale;
}

// -------------------------------------------------------- complex binary ---

inline void write_complex(const std::string& path, const ComplexTensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_complex: cannot open " + path);
    os.write("FNCX", 4);
    std::uint32_t nd = static_cast<std::uint32_t>(t.ndim());
    std::uint32_t d0 = static_cast<std::uint32_t>(t.dims[0]);
    std::uint32_t d1 = t.ndim() == 2 ? static_cast<std::uint32_t>(t.dims[1]) : 1u;
    os.write(reinterpret_cast<const char*>(&nd), 4);
    os.write(reinterpret_cast<const char*>(&d0), 4);
    os.write(reinterpret_cast<const char*>(&d1), 4);
    for (const auto& v : t.data) {
        double re = v.real(), im = v.imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
    }
}

inline ComplexTensor read_complex(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_complex: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "FNCX")
        throw std::runtime_error("read_complex: bad magic in " + path);
    std::uint32_t nd = 0, d0 = 0, d1 = 0;
    is.read(reinterpret_cast<char*>(&nd), 4);
    is.read(reinterpret_cast<char*>(&d0), 4);
    is.read(reinterpret_cast<char*>(&d1), 4);
    if (!is || (nd != 1 && nd != 2)) throw std::runtime_error("read_complex: bad header");
    std::vector<std::size_t> dims = nd == 1 ? std::vector<std::size_t>{d0}
                                            : std::vector<std::size_t>{d0, d1};
    ComplexTensor t(dims);
    for (auto& v : t.data) {
        double re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        v = {re, im};
    }
    if (!is) throw std::runtime_error("read_complex: truncated data");
    return t;
}

/// Variable-length complex vector (measurements). Same format with nd = 1 and
/// arbitrary (not necessarily power-of-two) length.
inline void write_complex_vec(const std::string& path, const CVec& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_complex_vec: cannot open " + path);
    os.write("FNCV", 4);
    std::uint32_t nd = 1, d0 = static_cast<std::uint32_t>(v.size()), d1 = 1;
    os.write(reinterpret_cast<const char*>(&nd), 4);
    os.write(reinterpret_cast<const char*>(&d0), 4);
    os.write(reinterpret_cast<const char*>(&d1), 4);
    for (const auto& c : v) {
        double re = c.real(), im = c.imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
    }
}

inline CVec read_complex_vec(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_complex_vec: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "FNCV")
        throw std::runtime_error("read_complex_vec: bad magic in " + path);
    std::uint32_t nd = 0, d0 = 0, d1 = 0;
    is.read(reinterpret_cast<char*>(&nd), 4);
    is.read(reinterpret_cast<char*>(&d0), 4);
    is.read(reinterpret_cast<char*>(&d1), 4);
    CVec v(d0);
    for (auto& c : v) {
        double re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        c = {re, im};
    }
    if (!is) throw std::runtime_error("read_complex_vec: truncated data");
    return v;
}

// ------------------------------------------------------------------ JSON ---

inline json level_model_to_json(const LevelModel& lm) {
    return json{{"M", lm.M}, {"s", lm.s}, {"w", lm.w_levels}};
}

inline LevelModel level_model_from_json(const json& j) {
    return LevelModel(j.at("M").get<std::vector<std::size_t>>(),
                      j.at("s").get<std::vector<std::size_t>>(),
                      j.at("w").get<std::vector<double>>());
}

inline json scheme_to_json(const SamplingScheme& sc) {
    json mpb = json::object();
    for (std::size_t b = 0; b < sc.m_per_band.size(); ++b)
        mpb[std::to_string(b)] = sc.m_per_band[b];
    return json{{"kind", sc.kind == TransformKind::Fourier ? "fourier" : "walsh"},
                {"r", sc.r},
                {"d", sc.d},
                {"seed", sc.seed},
                {"m_per_band", mpb},
                {"indices", sc.indices}};
}

inline SamplingScheme scheme_from_json(const json& j) {
    SamplingScheme sc;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "fourier") sc.kind = TransformKind::Fourier;
    else if (kind == "walsh") sc.kind = TransformKind::Walsh;
    else throw std::runtime_error("scheme_from_json: unknown kind " + kind);
    sc.r = j.at("r").get<int>();
    sc.d = j.at("d").get<int>();
    sc.seed = j.at("seed").get<std::uint64_t>();
    const auto& mpb = j.at("m_per_band");
    sc.m_per_band.resize(mpb.size());
    for (auto it = mpb.begin(); it != mpb.end(); ++it)
        sc.m_per_band[std::stoul(it.key())] = it.value().get<std::size_t>();
    sc.indices = j.at("indices").get<std::vector<std::size_t>>();
    // rebuild per-index scaling from band membership
    BandStructure bs = build_bands(sc.kind, sc.r, sc.d);
    std::vector<double> dval(bs.n_bands());
    std::vector<std::size_t> band_of(bs.N());
    for (std::size_t b = 0; b < bs.n_bands(); ++b) {
        dval[b] = std::sqrt(static_cast<double>(bs.bands[b].size()) /
                            static_cast<double>(sc.m_per_band[b]));
        if (sc.m_per_band[b] == bs.bands[b].size()) dval[b] = 1.0;
        for (auto i : bs.bands[b]) band_of[i] = b;
    }
    sc.scaling.resize(sc.indices.size());
    for (std::size_t i = 0; i < sc.indices.size(); ++i)
        sc.scaling[i] = dval[band_of[sc.indices[i]]];
    return sc;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_json_file: cannot open " + path);
    os << j.dump(2) << "\n";
}

inline json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_json_file: cannot open " + path);
    json j;
    is >> j;
    return j;
}

/// Per-frequency sampling multiplicity mask for d = 2 visualization.
inline void scheme_mask_pgm(const std::string& path, const SamplingScheme& sc) {
    if (sc.d != 2) throw std::invalid_argument("scheme_mask_pgm: d = 2 only");
    std::size_t K = std::size_t{1} << sc.r;
    PgmImage img;
    img.width = img.height = K;
    img.maxval = 255;
    img.pixels.assign(K * K, 0);
    for (auto i : sc.indices)
        if (img.pixels[i] < 255) ++img.pixels[i];
    write_pgm(path, img);
}

}  // namespace firenet
