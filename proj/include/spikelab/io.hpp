/*
   Copyright 2026 the spikelab authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "spikelab/ensemble.hpp"

namespace spikelab {

// Floats at 17 significant digits so CSV rows round-trip exactly.
inline std::string formatDouble(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// CSV (header: check,trial,index,statistic,value).
// ---------------------------------------------------------------------------

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw NumericError("CsvWriter: cannot open " + path);
        out_ << "check,trial,index,statistic,value\n";
    }

    void row(const std::string& check, int trial, const std::string& index,
             const std::string& statistic, double value) {
        out_ << check << ',' << trial << ',' << index << ',' << statistic
             << ',' << formatDouble(value) << '\n';
    }

private:
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Binary matrix container: 8-byte magic "SPKLAB01", then u64 matrix count,
// then per matrix a u32 name length, the name bytes, u64 rows, u64 cols and
// rows*cols little-endian f64 values in row-major order.
// ---------------------------------------------------------------------------

namespace detail {

inline void writeU64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t readU64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void writeU32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t readU32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline void writeF64(std::ostream& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    writeU64(out, bits);
}

inline double readF64(std::istream& in) {
    const std::uint64_t bits = readU64(in);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

}  // namespace detail

inline constexpr char kMatrixMagic[9] = "SPKLAB01";

struct NamedMatrix {
    std::string name;
    Matrix value;
};

inline void writeMatrixContainer(const std::string& path,
                                 const std::vector<NamedMatrix>& matrices) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("writeMatrixContainer: cannot open " + path);
    out.write(kMatrixMagic, 8);
    detail::writeU64(out, matrices.size());
    for (const auto& m : matrices) {
        detail::writeU32(out, static_cast<std::uint32_t>(m.name.size()));
        out.write(m.name.data(), static_cast<std::streamsize>(m.name.size()));
        detail::writeU64(out, static_cast<std::uint64_t>(m.value.rows()));
        detail::writeU64(out, static_cast<std::uint64_t>(m.value.cols()));
        for (Eigen::Index i = 0; i < m.value.rows(); ++i)
            for (Eigen::Index j = 0; j < m.value.cols(); ++j)
                detail::writeF64(out, m.value(i, j));
    }
}

inline std::vector<NamedMatrix> readMatrixContainer(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericError("readMatrixContainer: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kMatrixMagic, 8) != 0)
        throw NumericError("readMatrixContainer: bad magic");
    const std::uint64_t count = detail::readU64(in);
    std::vector<NamedMatrix> out;
    out.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::uint32_t nameLen = detail::readU32(in);
        std::string name(nameLen, '\0');
        in.read(name.data(), nameLen);
        const auto rows = static_cast<Eigen::Index>(detail::readU64(in));
        const auto cols = static_cast<Eigen::Index>(detail::readU64(in));
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = detail::readF64(in);
        if (!in) throw NumericError("readMatrixContainer: truncated file");
        out.push_back({std::move(name), std::move(m)});
    }
    return out;
}

inline void dumpSampleDraw(const std::string& path, const SampleDraw& draw) {
    std::vector<NamedMatrix> mats;
    mats.push_back({"X", draw.X});
    if (draw.Q.size() > 0) mats.push_back({"Q", draw.Q});
    if (draw.Qdot.size() > 0) mats.push_back({"Qdot", draw.Qdot});
    if (draw.H.size() > 0) mats.push_back({"H", draw.H});
    if (draw.Hdot.size() > 0) mats.push_back({"Hdot", draw.Hdot});
    writeMatrixContainer(path, mats);
}

// Plain numeric CSV: one row per matrix row, no header.
inline Matrix readNumericCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NumericError("readNumericCsv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            const std::string cell = line.substr(pos, comma - pos);
            if (!cell.empty()) row.push_back(std::stod(cell));
            pos = comma + 1;
        }
        if (!row.empty()) {
            if (!rows.empty() && rows.front().size() != row.size())
                throw NumericError("readNumericCsv: ragged rows");
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) throw NumericError("readNumericCsv: no data");
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
    return m;
}

}  // namespace spikelab
