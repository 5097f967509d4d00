// Synthetic 2-D classification datasets and the CSV schema used to persist
// them (header x1,...,xd,label; one sample per row, full double precision).
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "labo/nn.hpp"
#include "labo/rng.hpp"

namespace labo::data {

/// Two interleaved half-circles with isotropic Gaussian noise. Even indices
/// are class 0 (upper arc), odd indices class 1 (lower arc).
inline Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_two_moons: need at least 2 samples");
    if (noise < 0.0) throw std::invalid_argument("make_two_moons: negative noise");
    Dataset d;
    d.inputs = Matrix(n, 2);
    d.labels.resize(n);
    auto eng = rng::make_engine(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = rng::uniform01(eng) * std::numbers::pi;
        const int label = static_cast<int>(i % 2);
        double x = std::cos(t);
        double y = std::sin(t);
        if (label == 1) {
            x = 1.0 - x;
            y = 0.5 - y;
        }
        d.inputs(i, 0) = x + noise * rng::normal01(eng);
        d.inputs(i, 1) = y + noise * rng::normal01(eng);
        d.labels[i] = label;
    }
    return d;
}

/// K isotropic Gaussian clusters, centers equally spaced on a circle sized so
/// adjacent centers sit `separation` apart. Sample i belongs to cluster i % K.
inline Dataset make_blobs(std::size_t n, std::size_t classes, double separation, double noise,
                          std::uint64_t seed) {
    if (n < classes || classes < 2) throw std::invalid_argument("make_blobs: bad sizes");
    if (noise < 0.0 || separation < 0.0) throw std::invalid_argument("make_blobs: negative scale");
    const double radius =
        classes == 2 ? separation / 2.0 : separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(classes)));
    Dataset d;
    d.inputs = Matrix(n, 2);
    d.labels.resize(n);
    auto eng = rng::make_engine(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i % classes;
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(classes);
        d.inputs(i, 0) = radius * std::cos(ang) + noise * rng::normal01(eng);
        d.inputs(i, 1) = radius * std::sin(ang) + noise * rng::normal01(eng);
        d.labels[i] = static_cast<int>(k);
    }
    return d;
}

inline std::string to_csv(const Dataset& d) {
    std::string out;
    out.reserve(d.size() * 48);
    for (std::size_t j = 0; j < d.dim(); ++j) {
        out += 'x';
        out += std::to_string(j + 1);
        out += ',';
    }
    out += "label\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.dim(); ++j) {
            out += format_double(d.inputs(i, j));
            out += ',';
        }
        out += std::to_string(d.labels[i]);
        out += '\n';
    }
    return out;
}

inline void save_csv(const std::string& path, const Dataset& d) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << to_csv(d);
}

namespace idx_detail {

inline std::uint32_t read_u32_be(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error(path + ": truncated idx header");
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

inline std::vector<std::uint32_t> read_idx_header(std::istream& is, const std::string& path) {
    const std::uint32_t magic = read_u32_be(is, path);
    if ((magic >> 16) != 0) throw std::runtime_error(path + ": bad idx magic");
    if (((magic >> 8) & 0xff) != 0x08) throw std::runtime_error(path + ": only unsigned-byte idx data supported");
    const std::uint32_t ndim = magic & 0xff;
    if (ndim == 0 || ndim > 3) throw std::runtime_error(path + ": unsupported idx rank");
    std::vector<std::uint32_t> dims(ndim);
    for (auto& d : dims) d = read_u32_be(is, path);
    return dims;
}

}  // namespace idx_detail

/// Loads an images/labels pair of idx files (unsigned-byte payload). Image
/// tensors are flattened per sample and scaled to [0, 1].
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw std::runtime_error("cannot read " + images_path);
    const auto img_dims = idx_detail::read_idx_header(imgs, images_path);
    if (img_dims.size() < 2) throw std::runtime_error(images_path + ": image idx needs at least 2 dimensions");
    const std::size_t n = img_dims[0];
    std::size_t per_sample = 1;
    for (std::size_t i = 1; i < img_dims.size(); ++i) per_sample *= img_dims[i];

    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw std::runtime_error("cannot read " + labels_path);
    const auto lab_dims = idx_detail::read_idx_header(labs, labels_path);
    if (lab_dims.size() != 1 || lab_dims[0] != n)
        throw std::runtime_error(labels_path + ": label count does not match image count");

    Dataset d;
    d.inputs = Matrix(n, per_sample);
    d.labels.resize(n);
    std::vector<unsigned char> row(per_sample);
    for (std::size_t i = 0; i < n; ++i) {
        imgs.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(per_sample));
        if (!imgs) throw std::runtime_error(images_path + ": truncated idx payload");
        for (std::size_t j = 0; j < per_sample; ++j) d.inputs(i, j) = static_cast<double>(row[j]) / 255.0;
        const int c = labs.get();
        if (c == EOF) throw std::runtime_error(labels_path + ": truncated idx payload");
        d.labels[i] = c;
    }
    d.validate();
    return d;
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
    std::size_t dim = 0;
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) {
            if (col == "label") break;
            ++dim;
        }
        if (dim == 0) throw std::runtime_error(path + ": bad CSV header");
    }
    std::vector<double> values;
    std::vector<int> labels;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        for (std::size_t j = 0; j < dim; ++j) {
            if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": short row");
            values.push_back(std::stod(cell));
        }
        if (!std::getline(row, cell, ',')) throw std::runtime_error(path + ": missing label");
        labels.push_back(std::stoi(cell));
    }
    Dataset d;
    d.inputs = Matrix(labels.size(), dim);
    d.inputs.data = std::move(values);
    d.labels = std::move(labels);
    d.validate();
    return d;
}

}  // namespace labo::data
