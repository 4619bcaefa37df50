#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sonarscat {

/// Uniformly sampled real time series.
struct Signal {
    std::vector<double> samples;
    double sample_rate = 1.0;  // samples/second, > 0
    double t0 = 0.0;           // start time, seconds

    std::size_t size() const { return samples.size(); }
    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

struct Spectrum {
    std::vector<std::complex<double>> bins;
    double bin_spacing = 0.0;  // Hz

    std::size_t size() const { return bins.size(); }
};

inline void validate(const Signal& f, const char* who = "signal") {
    if (f.samples.empty()) throw std::invalid_argument(std::string(who) + ": empty sample array");
    if (!(f.sample_rate > 0.0)) throw std::invalid_argument(std::string(who) + ": sample_rate must be positive");
    for (double v : f.samples)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite sample");
}

inline double energy(const Signal& f) {
    double e = 0.0;
    for (double v : f.samples) e += v * v;
    return e;
}

inline double norm2(const std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) e += x * x;
    return std::sqrt(e);
}

// --- serialization ---------------------------------------------------------
// CSV: first line "sample_rate,<value>", then one sample per line.
// Binary: 16-byte header (magic "SGNL", u32 length, f64 sample_rate),
// then little-endian f64 samples.

inline void write_csv(const Signal& f, std::ostream& out) {
    out.precision(17);
    out << "sample_rate," << f.sample_rate << "\n";
    for (double v : f.samples) out << v << "\n";
}

inline Signal read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("signal csv: empty stream");
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.substr(0, comma) != "sample_rate")
        throw std::runtime_error("signal csv: missing sample_rate header");
    Signal f;
    f.sample_rate = std::stod(line.substr(comma + 1));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        f.samples.push_back(std::stod(line));
    }
    validate(f, "signal csv");
    return f;
}

inline void write_csv_file(const Signal& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    write_csv(f, out);
}

inline Signal read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    return read_csv(in);
}

inline void write_binary(const Signal& f, std::ostream& out) {
    const char magic[4] = {'S', 'G', 'N', 'L'};
    out.write(magic, 4);
    const std::uint32_t n = static_cast<std::uint32_t>(f.samples.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&f.sample_rate), 8);
    out.write(reinterpret_cast<const char*>(f.samples.data()),
              static_cast<std::streamsize>(f.samples.size() * sizeof(double)));
}

inline Signal read_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SGNL", 4) != 0)
        throw std::runtime_error("signal binary: bad magic");
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    Signal f;
    in.read(reinterpret_cast<char*>(&f.sample_rate), 8);
    f.samples.resize(n);
    in.read(reinterpret_cast<char*>(f.samples.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("signal binary: truncated stream");
    validate(f, "signal binary");
    return f;
}

inline void write_binary_file(const Signal& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    write_binary(f, out);
}

inline Signal read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    return read_binary(in);
}

}  // namespace sonarscat
