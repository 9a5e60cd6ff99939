#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cgap/graph.hpp"

namespace cgap {

// Shortest round-tripping decimal form.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline long long parse_int(const std::string& s, const std::string& file, int line_no) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw validation_error(file + ":" + std::to_string(line_no) + ": expected integer, got '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s, const std::string& file, int line_no) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw validation_error(file + ":" + std::to_string(line_no) + ": expected number, got '" + s + "'");
    return v;
}

struct CsvReader {
    std::string file;
    std::ifstream in;
    int line_no = 0;

    CsvReader(const std::filesystem::path& dir, const std::string& name) : file(name), in(dir / name) {
        if (!in) throw validation_error("missing file: " + (dir / name).string());
    }

    bool next(std::vector<std::string>& fields, size_t expect) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
            fields = split_csv_line(line);
            if (fields.size() != expect)
                throw validation_error(file + ":" + std::to_string(line_no) + ": expected " +
                                       std::to_string(expect) + " fields, got " + std::to_string(fields.size()));
            return true;
        }
        return false;
    }

    void expect_header(const std::string& header) {
        std::string line;
        if (!std::getline(in, line)) throw validation_error(file + ": empty file");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != header)
            throw validation_error(file + ":1: expected header '" + header + "', got '" + line + "'");
    }
};

}  // namespace detail

// Writes the five-file CSV bundle.
inline void save_city_dataset(const std::filesystem::path& dir, const UrbanRegionGraph& g,
                              const DownstreamLabels& labels) {
    std::filesystem::create_directories(dir);
    int n = g.n_regions;
    {
        std::ofstream out(dir / "regions.csv");
        out << "region_id,x,y\n";
        for (int i = 0; i < n; ++i)
            out << i << "," << format_double(g.coords[i][0]) << "," << format_double(g.coords[i][1]) << "\n";
    }
    {
        std::ofstream out(dir / "edges.csv");
        out << "src,dst\n";
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (g.adjacency(i, j) != 0.0) out << i << "," << j << "\n";
    }
    {
        std::ofstream out(dir / "mobility.csv");
        out << "src,dst,count\n";
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (g.mobility(i, j) != 0.0)
                    out << i << "," << j << "," << static_cast<long long>(g.mobility(i, j)) << "\n";
    }
    {
        std::ofstream out(dir / "poi.csv");
        out << "region_id,count\n";
        for (int i = 0; i < n; ++i) out << i << "," << g.poi[i] << "\n";
    }
    {
        std::ofstream out(dir / "labels.csv");
        out << "region_id,crime,checkin,landuse\n";
        for (int i = 0; i < n; ++i)
            out << i << "," << format_double(labels.crime[i]) << "," << format_double(labels.checkin[i]) << ","
                << labels.landuse[i] << "\n";
    }
}

// Loads and validates the five-file CSV bundle. Region ids are remapped to
// 0..n-1 preserving regions.csv order.
inline std::pair<UrbanRegionGraph, DownstreamLabels> load_city_dataset(const std::filesystem::path& dir) {
    UrbanRegionGraph g;
    DownstreamLabels labels;
    std::map<long long, int> id_map;
    std::vector<std::string> f;

    {
        detail::CsvReader r(dir, "regions.csv");
        r.expect_header("region_id,x,y");
        while (r.next(f, 3)) {
            long long id = detail::parse_int(f[0], r.file, r.line_no);
            if (id_map.count(id))
                throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": duplicate region id " +
                                       std::to_string(id));
            id_map[id] = g.n_regions++;
            g.coords.push_back({detail::parse_double(f[1], r.file, r.line_no),
                                detail::parse_double(f[2], r.file, r.line_no)});
        }
        if (g.n_regions == 0) throw validation_error("regions.csv: no regions");
    }
    int n = g.n_regions;
    g.adjacency = Tensor2(n, n);
    g.mobility = Tensor2(n, n);
    g.poi.assign(n, 0);
    labels.crime.assign(n, 0.0);
    labels.checkin.assign(n, 0.0);
    labels.landuse.assign(n, 0);

    auto lookup = [&](const std::string& s, detail::CsvReader& r) {
        long long id = detail::parse_int(s, r.file, r.line_no);
        auto it = id_map.find(id);
        if (it == id_map.end())
            throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": unknown region id " +
                                   std::to_string(id));
        return it->second;
    };

    {
        detail::CsvReader r(dir, "edges.csv");
        r.expect_header("src,dst");
        while (r.next(f, 2)) {
            int a = lookup(f[0], r), b = lookup(f[1], r);
            if (a == b)
                throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": self-loop not allowed");
            g.adjacency(a, b) = 1.0;
            g.adjacency(b, a) = 1.0;
        }
    }
    {
        detail::CsvReader r(dir, "mobility.csv");
        r.expect_header("src,dst,count");
        Tensor2 seen(n, n);
        while (r.next(f, 3)) {
            int a = lookup(f[0], r), b = lookup(f[1], r);
            long long count = detail::parse_int(f[2], r.file, r.line_no);
            if (count < 0)
                throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": negative count");
            if (seen(a, b) != 0.0)
                throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": duplicate entry");
            seen(a, b) = 1.0;
            g.mobility(a, b) = static_cast<double>(count);
        }
    }
    {
        detail::CsvReader r(dir, "poi.csv");
        r.expect_header("region_id,count");
        std::vector<bool> seen(n, false);
        while (r.next(f, 2)) {
            int i = lookup(f[0], r);
            long long count = detail::parse_int(f[1], r.file, r.line_no);
            if (count < 0)
                throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": negative count");
            if (seen[i]) throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": duplicate region");
            seen[i] = true;
            g.poi[i] = count;
        }
    }
    {
        detail::CsvReader r(dir, "labels.csv");
        r.expect_header("region_id,crime,checkin,landuse");
        std::vector<bool> seen(n, false);
        while (r.next(f, 4)) {
            int i = lookup(f[0], r);
            if (seen[i]) throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": duplicate region");
            seen[i] = true;
            labels.crime[i] = detail::parse_double(f[1], r.file, r.line_no);
            labels.checkin[i] = detail::parse_double(f[2], r.file, r.line_no);
            labels.landuse[i] = static_cast<int>(detail::parse_int(f[3], r.file, r.line_no));
            if (labels.crime[i] < 0.0 || labels.checkin[i] < 0.0)
                throw validation_error(r.file + ":" + std::to_string(r.line_no) + ": negative label");
        }
    }

    validate_graph(g);
    return {std::move(g), std::move(labels)};
}

// FNV-1a over the bundle files, for run manifests.
inline std::string dataset_hash(const std::filesystem::path& dir) {
    uint64_t h = 1469598103934665603ULL;
    for (const char* name : {"regions.csv", "edges.csv", "mobility.csv", "poi.csv", "labels.csv"}) {
        std::ifstream in(dir / name, std::ios::binary);
        char ch;
        while (in.get(ch)) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ULL;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cgap
