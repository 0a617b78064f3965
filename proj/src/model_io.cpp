#include "fleetagg/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fleetagg {

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) {
        throw std::runtime_error("format_real: conversion failed");
    }
    return std::string(buf, ptr);
}

namespace {

double parse_real(const std::string& token) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw std::runtime_error("model file: invalid number '" + token + "'");
    }
    return value;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string line() {
        std::string s;
        if (!std::getline(in_, s)) {
            throw std::runtime_error("model file: unexpected end of file after line " + std::to_string(number_));
        }
        ++number_;
        if (!s.empty() && s.back() == '\r') {
            s.pop_back();
        }
        return s;
    }

    // Reads "<key> <rest>" and returns rest.
    std::string field(const std::string& key) {
        const std::string s = line();
        if (s.rfind(key, 0) != 0 || (s.size() > key.size() && s[key.size()] != ' ')) {
            throw std::runtime_error("model file line " + std::to_string(number_) + ": expected '" + key + "'");
        }
        return s.size() > key.size() ? s.substr(key.size() + 1) : std::string();
    }

    int number() const { return number_; }

private:
    std::istream& in_;
    int number_ = 0;
};

Eigen::VectorXd parse_row(const std::string& text, Eigen::Index n, int line) {
    std::istringstream is(text);
    Eigen::VectorXd row(n);
    std::string token;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!(is >> token)) {
            throw std::runtime_error("model file line " + std::to_string(line) + ": expected " + std::to_string(n) +
                                     " values");
        }
        row(j) = parse_real(token);
    }
    if (is >> token) {
        throw std::runtime_error("model file line " + std::to_string(line) + ": too many values");
    }
    return row;
}

}  // namespace

void write_model(std::ostream& out, const CopulaModel& model) {
    const auto& d = model.diagnostics;
    out << "fleetagg-copula-model\n";
    out << "format_version " << kModelFormatVersion << '\n';
    out << "clamp_eps " << format_real(model.clamp_eps) << '\n';
    out << "t_used " << d.t_used << '\n';
    out << "clamp_rate " << format_real(d.clamp_rate) << '\n';
    out << "psd_repair_applied " << (d.psd_repair_applied ? 1 : 0) << '\n';
    out << "min_eigenvalue_before_repair " << format_real(d.min_eigenvalue_before_repair) << '\n';
    out << "jitter_used " << format_real(model.factor.jitter_used) << '\n';
    out << "n_sites " << model.sites.size() << '\n';
    for (const auto& site : model.sites) {
        out << "site " << site << '\n';
    }
    out << "z_mean";
    for (Eigen::Index i = 0; i < d.z_mean.size(); ++i) {
        out << ' ' << format_real(d.z_mean(i));
    }
    out << "\nsigma\n";
    for (Eigen::Index i = 0; i < model.sigma.rows(); ++i) {
        for (Eigen::Index j = 0; j < model.sigma.cols(); ++j) {
            out << (j ? " " : "") << format_real(model.sigma(i, j));
        }
        out << '\n';
    }
}

void write_model(const std::filesystem::path& path, const CopulaModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open model file for writing: " + path.string());
    }
    write_model(out, model);
    if (!out) {
        throw std::runtime_error("failed writing model file: " + path.string());
    }
}

CopulaModel read_model(std::istream& in) {
    LineReader reader(in);
    if (reader.line() != "fleetagg-copula-model") {
        throw std::runtime_error("model file: missing fleetagg-copula-model header");
    }
    const int version = std::stoi(reader.field("format_version"));
    if (version != kModelFormatVersion) {
        throw std::runtime_error("model file: unsupported format_version " + std::to_string(version));
    }
    CopulaModel model;
    model.clamp_eps = parse_real(reader.field("clamp_eps"));
    auto& d = model.diagnostics;
    d.t_used = std::stoll(reader.field("t_used"));
    d.clamp_rate = parse_real(reader.field("clamp_rate"));
    d.psd_repair_applied = reader.field("psd_repair_applied") == "1";
    d.min_eigenvalue_before_repair = parse_real(reader.field("min_eigenvalue_before_repair"));
    const double jitter = parse_real(reader.field("jitter_used"));
    const auto n = static_cast<Eigen::Index>(std::stoll(reader.field("n_sites")));
    if (n < 1) {
        throw std::runtime_error("model file: n_sites must be positive");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        model.sites.push_back(reader.field("site"));
    }
    d.z_mean = parse_row(reader.field("z_mean"), n, reader.number());
    reader.field("sigma");
    model.sigma.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        model.sigma.row(i) = parse_row(reader.line(), n, reader.number()).transpose();
    }
    model.factor = cholesky(model.sigma);
    if (model.factor.jitter_used != jitter) {
        throw std::runtime_error("model file: sigma refactorizes with a different jitter than recorded");
    }
    return model;
}

CopulaModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path.string());
    }
    return read_model(in);
}

}  // namespace fleetagg
