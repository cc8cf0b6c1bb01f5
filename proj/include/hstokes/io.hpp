#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hstokes/error.hpp"
#include "hstokes/field.hpp"
#include "hstokes/kernels.hpp"
#include "hstokes/navier_stokes.hpp"

namespace hstokes::io {

using nlohmann::json;

namespace detail {

inline void write_le(std::ofstream& os, std::span<const double> v) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
    } else {
        for (double x : v) {
            auto u = std::bit_cast<std::uint64_t>(x);
            char b[8];
            for (int i = 0; i < 8; ++i) b[i] = char((u >> (8 * i)) & 0xff);
            os.write(b, 8);
        }
    }
}

inline std::vector<double> read_le(const std::filesystem::path& p, std::size_t count) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw ValidationError("io: cannot open " + p.string());
    std::vector<unsigned char> raw(count * 8);
    is.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (std::size_t(is.gcount()) != raw.size() || is.peek() != EOF)
        throw ValidationError("io: " + p.string() + " does not hold " + std::to_string(count) + " float64 values");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= std::uint64_t(raw[i * 8 + b]) << (8 * b);
        v[i] = std::bit_cast<double>(u);
    }
    return v;
}

inline json grid_json(const GridSpec& g) {
    return {{"dim", g.dim()},         {"L", g.period_l()}, {"H", g.height_h()},
            {"n_tangential", g.n_tangential()}, {"n_normal", g.n_normal()},
            {"T", g.t_final()},       {"n_time", g.n_time()}};
}

inline GridSpec grid_from_json(const json& j) {
    return make_grid(j.at("dim").get<int>(), j.at("L").get<double>(), j.at("H").get<double>(),
                     j.at("n_tangential").get<int>(), j.at("n_normal").get<int>(), j.at("T").get<double>(),
                     j.at("n_time").get<int>());
}

inline std::vector<std::size_t> tangential_shape(const GridSpec& g) {
    std::vector<std::size_t> s(g.dim() - 1, std::size_t(g.n_tangential()));
    return s;
}

inline void write_pair(const std::filesystem::path& stem, std::span<const double> values, const json& meta) {
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    std::ofstream os(stem.string() + ".bin", std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("io: cannot write " + stem.string() + ".bin");
    write_le(os, values);
    std::ofstream js(stem.string() + ".json", std::ios::trunc);
    js << meta.dump(2) << "\n";
}

inline json read_meta(const std::filesystem::path& stem) {
    std::ifstream js(stem.string() + ".json");
    if (!js) throw ValidationError("io: cannot open " + stem.string() + ".json");
    try {
        return json::parse(js);
    } catch (const json::exception& e) {
        throw ValidationError("io: bad sidecar " + stem.string() + ".json: " + e.what());
    }
}

inline std::size_t product(const json& shape) {
    std::size_t n = 1;
    for (const auto& s : shape) n *= s.get<std::size_t>();
    return n;
}

}  // namespace detail

/// Writes stem.bin (little-endian float64, row-major (time, x_n, tangential axes, component)) and stem.json.
inline void write_field(const std::filesystem::path& stem, const SpaceTimeField& f, const std::string& name) {
    const GridSpec& g = f.grid();
    std::vector<std::size_t> shape{std::size_t(f.n_slices()), std::size_t(f.rows())};
    for (auto s : detail::tangential_shape(g)) shape.push_back(s);
    shape.push_back(std::size_t(f.components()));
    const json meta{{"name", name},
                            {"kind", "space_time"},
                            {"extent", f.extent() == Extent::half ? "half" : "full"},
                            {"shape", shape},
                            {"dtype", "<f8"},
                            {"order", "time, x_n, tangential axes, component"},
                            {"grid", detail::grid_json(g)}};
    detail::write_pair(stem, f.values(), meta);
}

inline void write_field(const std::filesystem::path& stem, const BoundaryField& b, const std::string& name) {
    const GridSpec& g = b.grid();
    std::vector<std::size_t> shape{std::size_t(b.n_slices())};
    for (auto s : detail::tangential_shape(g)) shape.push_back(s);
    shape.push_back(std::size_t(b.components()));
    const json meta{{"name", name},        {"kind", "boundary"},
                            {"shape", shape},      {"dtype", "<f8"},
                            {"order", "time, tangential axes, component"},
                            {"grid", detail::grid_json(g)}};
    detail::write_pair(stem, b.values(), meta);
}

inline void write_field(const std::filesystem::path& stem, const Field& f, const std::string& name) {
    const GridSpec& g = f.grid();
    std::vector<std::size_t> shape{std::size_t(f.rows())};
    for (auto s : detail::tangential_shape(g)) shape.push_back(s);
    shape.push_back(std::size_t(f.components()));
    const json meta{{"name", name},
                            {"kind", "slice"},
                            {"extent", f.extent() == Extent::half ? "half" : "full"},
                            {"shape", shape},
                            {"dtype", "<f8"},
                            {"order", "x_n, tangential axes, component"},
                            {"grid", detail::grid_json(g)}};
    detail::write_pair(stem, f.values(), meta);
}

inline SpaceTimeField read_space_time(const std::filesystem::path& stem) {
    const auto meta = detail::read_meta(stem);
    if (meta.value("kind", "") != "space_time") throw ValidationError("io: " + stem.string() + " is not a space_time field");
    const GridSpec g = detail::grid_from_json(meta.at("grid"));
    const Extent e = meta.value("extent", "half") == "full" ? Extent::full : Extent::half;
    const int comps = meta.at("shape").back().get<int>();
    SpaceTimeField f(g, e, comps);
    if (detail::product(meta.at("shape")) != f.values().size())
        throw ValidationError("io: shape of " + stem.string() + " does not match its grid");
    const auto v = detail::read_le(stem.string() + ".bin", f.values().size());
    std::copy(v.begin(), v.end(), f.values().begin());
    hstokes::detail::require_finite(f.values(), "io");
    return f;
}

inline BoundaryField read_boundary(const std::filesystem::path& stem) {
    const auto meta = detail::read_meta(stem);
    if (meta.value("kind", "") != "boundary") throw ValidationError("io: " + stem.string() + " is not a boundary field");
    const GridSpec g = detail::grid_from_json(meta.at("grid"));
    BoundaryField b(g, meta.at("shape").back().get<int>());
    if (detail::product(meta.at("shape")) != b.values().size())
        throw ValidationError("io: shape of " + stem.string() + " does not match its grid");
    const auto v = detail::read_le(stem.string() + ".bin", b.values().size());
    std::copy(v.begin(), v.end(), b.values().begin());
    hstokes::detail::require_finite(b.values(), "io");
    return b;
}

inline Field read_slice(const std::filesystem::path& stem) {
    const auto meta = detail::read_meta(stem);
    if (meta.value("kind", "") != "slice") throw ValidationError("io: " + stem.string() + " is not a slice field");
    const GridSpec g = detail::grid_from_json(meta.at("grid"));
    const Extent e = meta.value("extent", "half") == "full" ? Extent::full : Extent::half;
    Field f(g, e, meta.at("shape").back().get<int>());
    if (detail::product(meta.at("shape")) != f.values().size())
        throw ValidationError("io: shape of " + stem.string() + " does not match its grid");
    const auto v = detail::read_le(stem.string() + ".bin", f.values().size());
    std::copy(v.begin(), v.end(), f.values().begin());
    hstokes::detail::require_finite(f.values(), "io");
    return f;
}

/// Kernel-table moments as a (row, interval, 4) array: M0 and M1 of the diagonal and composite kernels.
inline void write_kernel_table(const std::filesystem::path& stem, const KernelTable& t) {
    const json meta{{"name", "kernel_table"},
                            {"kind", "kernel_table"},
                            {"kappa", t.kappa},
                            {"shape", {t.n_normal, t.n_intervals, 4}},
                            {"dtype", "<f8"},
                            {"order", "x_n, time interval, (M0 diag, M1 diag, M0 composite, M1 composite)"}};
    detail::write_pair(stem, t.moments, meta);
}

// ---------------------------------------------------------------------------
// CSV summaries

struct SummaryRow {
    std::string name;
    double value = 0;
    std::string comparison;  ///< "<=", ">=" or "info"
    double threshold = 0;
    bool pass = true;
};

inline SummaryRow check_le(std::string name, double value, double threshold) {
    return {std::move(name), value, "<=", threshold, value <= threshold};
}
inline SummaryRow check_ge(std::string name, double value, double threshold) {
    return {std::move(name), value, ">=", threshold, value >= threshold};
}
inline SummaryRow info(std::string name, double value) { return {std::move(name), value, "info", 0, true}; }

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ValidationError("io: cannot write " + path.string());
    os << "name,value,comparison,threshold,pass\n";
    for (const auto& r : rows)
        os << r.name << ',' << format_double(r.value) << ',' << r.comparison << ','
           << (r.comparison == "info" ? std::string() : format_double(r.threshold)) << ','
           << (r.pass ? "true" : "false") << '\n';
}

inline void write_trace(const std::filesystem::path& stem, const IterationTrace& tr) {
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    std::ofstream os(stem.string() + ".csv", std::ios::trunc);
    os << "m,u_linf,u_space,u_time,u_norm,U_linf,U_space,U_time,U_norm,ratio\n";
    json recs = json::array();
    for (const auto& r : tr.records) {
        os << r.m << ',' << format_double(r.u_next.linf) << ',' << format_double(r.u_next.space_seminorm) << ','
           << format_double(r.u_next.time_seminorm) << ',' << format_double(r.u_next.norm()) << ','
           << format_double(r.U.linf) << ',' << format_double(r.U.space_seminorm) << ','
           << format_double(r.U.time_seminorm) << ',' << format_double(r.U.norm()) << ','
           << (std::isnan(r.ratio) ? std::string() : format_double(r.ratio)) << '\n';
        recs.push_back({{"m", r.m},
                        {"u_norm", r.u_next.norm()},
                        {"U_norm", r.U.norm()},
                        {"ratio", std::isnan(r.ratio) ? json(nullptr) : json(r.ratio)}});
    }
    const json j{{"M0", tr.M0},           {"M", tr.M},
                         {"T_star", tr.T_star},   {"converged", tr.converged},
                         {"monotone", tr.monotone}, {"stop_reason", tr.stop_reason},
                         {"records", recs}};
    std::ofstream js(stem.string() + ".json", std::ios::trunc);
    js << j.dump(2) << "\n";
}

}  // namespace hstokes::io
