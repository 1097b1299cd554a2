#include "bll/field_io.hpp"

#include "bll/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace bll {

namespace {

static_assert(std::endian::native == std::endian::little, "BLLF writer assumes a little-endian host");

constexpr char kMagic[4] = {'B', 'L', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(ErrorKind::Io, "truncated BLLF file " + path.string());
    return v;
}

} // namespace

void write_bllf(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().nx));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid().nz));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(f.staggering()));
    const auto v = f.values();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
}

ScalarField read_bllf(const std::filesystem::path& path, double lx) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorKind::Io, "cannot open " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::Io, path.string() + " is not a BLLF file");
    const auto version = get<std::uint32_t>(is, path);
    if (version != kVersion) fail(ErrorKind::Io, "unsupported BLLF version " + std::to_string(version));
    const auto nx = get<std::uint32_t>(is, path);
    const auto nz = get<std::uint32_t>(is, path);
    const auto stag = get<std::uint8_t>(is, path);
    if (stag > 2) fail(ErrorKind::Io, "bad staggering tag in " + path.string());
    ScalarField f(Grid(static_cast<int>(nx), static_cast<int>(nz), lx), static_cast<Staggering>(stag));
    auto v = f.values();
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double))))
        fail(ErrorKind::Io, "truncated BLLF file " + path.string());
    return f;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) fail(ErrorKind::Shape, "csv: header and column counts differ");
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) fail(ErrorKind::Shape, "csv: columns differ in length");
    std::ofstream os(path, std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
    os << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j][r];
        os << '\n';
    }
    if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<double> horizontal_profile(const ScalarField& f) {
    std::vector<double> out(static_cast<std::size_t>(f.rows()), 0.0);
    for (int k = 0; k < f.rows(); ++k) {
        double s = 0.0;
        for (int i = 0; i < f.cols(); ++i) s += f(i, k);
        out[static_cast<std::size_t>(k)] = s / f.cols();
    }
    return out;
}

} // namespace bll
