#include "lyap/cli/table_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

#include "lyap/errors.hpp"

namespace lyap::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                std::string& header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    if (!std::getline(in, header)) throw IoError(path + ": empty file");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_line(line));
    }
    return rows;
}

double parse_num(const std::string& s, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ": malformed number '" + s + "'");
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

FunctionFamily read_family_csv(const std::string& path, const SampledDomain& dom) {
    std::string header;
    const auto rows = read_rows(path, header);
    const auto head = split_line(header);
    if (head.size() < 3 || head[0] != "cell_index" || head[1] != "i")
        throw IoError(path + ": expected header cell_index,i,f_1..f_n");
    const int n = static_cast<int>(head.size()) - 2;
    int m = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n + 2)
            throw IoError(path + ": ragged row");
        m = std::max(m, static_cast<int>(parse_num(row[1], path)));
    }
    if (m < 1) throw IoError(path + ": no members found");
    const int C = dom.num_cells();
    FunctionFamily fam;
    fam.family_size = m;
    fam.value_dim = n;
    fam.source = FamilySource::sampled_table;
    fam.source_id = path;
    fam.values.assign(static_cast<std::size_t>(C) * m * n,
                      std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : rows) {
        const int c = static_cast<int>(parse_num(row[0], path));
        const int i = static_cast<int>(parse_num(row[1], path)) - 1;
        if (c < 0 || c >= C || i < 0)
            throw IoError(path + ": cell or member index out of range");
        double* out = fam.mutable_value(c, i);
        for (int k = 0; k < n; ++k) out[k] = parse_num(row[2 + k], path);
    }
    fam.validate(dom);  // rejects missing (NaN) entries
    return fam;
}

void write_family_csv(const std::string& path, const FunctionFamily& family,
                      const SampledDomain& dom) {
    auto out = open_out(path);
    out << "cell_index,i";
    for (int k = 1; k <= family.value_dim; ++k) out << ",f_" << k;
    out << "\n";
    for (int c = 0; c < dom.num_cells(); ++c)
        for (int i = 0; i < family.family_size; ++i) {
            out << c << ',' << (i + 1);
            for (double v : family.value(c, i)) out << ',' << fmt(v);
            out << "\n";
        }
}

RelaxedDensity read_density_csv(const std::string& path, const SampledDomain& dom) {
    std::string header;
    const auto rows = read_rows(path, header);
    const auto head = split_line(header);
    if (head.size() < 2 || head[0] != "cell_index")
        throw IoError(path + ": expected header cell_index,theta_1..theta_m");
    const int m = static_cast<int>(head.size()) - 1;
    RelaxedDensity d;
    d.family_size = m;
    d.weights.assign(static_cast<std::size_t>(dom.num_cells()) * m,
                     std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m + 1) throw IoError(path + ": ragged row");
        const int c = static_cast<int>(parse_num(row[0], path));
        if (c < 0 || c >= dom.num_cells())
            throw IoError(path + ": cell index out of range");
        for (int i = 0; i < m; ++i)
            d.weights[static_cast<std::size_t>(c) * m + i] = parse_num(row[1 + i], path);
    }
    d.normalize_and_validate();
    return d;
}

void write_density_csv(const std::string& path, const RelaxedDensity& density) {
    auto out = open_out(path);
    out << "cell_index";
    for (int i = 1; i <= density.family_size; ++i) out << ",theta_" << i;
    out << "\n";
    for (int c = 0; c < density.num_cells(); ++c) {
        out << c;
        for (double v : density.cell(c)) out << ',' << fmt(v);
        out << "\n";
    }
}

AuxiliaryField read_field_csv(const std::string& path, const SampledDomain& dom) {
    std::string header;
    const auto rows = read_rows(path, header);
    const auto head = split_line(header);
    if (head.size() < 2 || head[0] != "cell_index")
        throw IoError(path + ": expected header cell_index,v_1..v_m");
    const int m = static_cast<int>(head.size()) - 1;
    AuxiliaryField f;
    f.family_size = m;
    f.provenance = AuxiliaryField::Provenance::user;
    f.reference = path;
    f.values.assign(static_cast<std::size_t>(dom.num_cells()) * m,
                    std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m + 1) throw IoError(path + ": ragged row");
        const int c = static_cast<int>(parse_num(row[0], path));
        if (c < 0 || c >= dom.num_cells())
            throw IoError(path + ": cell index out of range");
        for (int i = 0; i < m; ++i)
            f.values[static_cast<std::size_t>(c) * m + i] = parse_num(row[1 + i], path);
    }
    f.validate(dom);
    return f;
}

void write_field_csv(const std::string& path, const AuxiliaryField& field) {
    auto out = open_out(path);
    out << "cell_index";
    for (int i = 1; i <= field.family_size; ++i) out << ",v_" << i;
    out << "\n";
    for (int c = 0; c < field.num_cells(); ++c) {
        out << c;
        for (double v : field.cell(c)) out << ',' << fmt(v);
        out << "\n";
    }
}

void write_partition_csv(const std::string& path, const Partition& partition) {
    auto out = open_out(path);
    out << "cell_index,assigned_i";
    for (int i = 1; i <= partition.family_size; ++i) out << ",frac_theta_" << i;
    out << "\n";
    std::vector<const Partition::FractionalCell*> frac(partition.assignment.size(),
                                                       nullptr);
    for (const auto& fc : partition.fractional) frac[fc.cell] = &fc;
    for (std::size_t c = 0; c < partition.assignment.size(); ++c) {
        out << c << ',';
        if (partition.assignment[c] >= 0) {
            out << (partition.assignment[c] + 1);
            for (int i = 0; i < partition.family_size; ++i) out << ',';
        } else {
            const auto* fc = frac[c];
            if (!fc)
                throw ValidationError("partition: cell " + std::to_string(c) +
                                      " has neither assignment nor weights");
            for (int i = 0; i < partition.family_size; ++i)
                out << ',' << fmt(fc->weights[i]);
        }
        out << "\n";
    }
}

Partition read_partition_csv(const std::string& path, const SampledDomain& dom) {
    std::string header;
    const auto rows = read_rows(path, header);
    const auto head = split_line(header);
    if (head.size() < 3 || head[0] != "cell_index" || head[1] != "assigned_i")
        throw IoError(path +
                      ": expected header cell_index,assigned_i,frac_theta_1..");
    const int m = static_cast<int>(head.size()) - 2;
    Partition p;
    p.family_size = m;
    p.assignment.assign(dom.num_cells(), -2);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m + 2) throw IoError(path + ": ragged row");
        const int c = static_cast<int>(parse_num(row[0], path));
        if (c < 0 || c >= dom.num_cells())
            throw IoError(path + ": cell index out of range");
        if (!row[1].empty()) {
            p.assignment[c] = static_cast<int>(parse_num(row[1], path)) - 1;
            continue;
        }
        Partition::FractionalCell fc;
        fc.cell = c;
        fc.weights.resize(m);
        for (int i = 0; i < m; ++i) fc.weights[i] = parse_num(row[2 + i], path);
        p.assignment[c] = -1;
        p.fractional.push_back(std::move(fc));
    }
    for (int a : p.assignment)
        if (a == -2) throw IoError(path + ": missing cells in partition table");
    return p;
}

void write_plot_csv(const std::string& path, const SampledDomain& dom,
                    const Partition& partition, const FunctionFamily& family,
                    const AuxiliaryField& field,
                    const std::vector<double>& lambda_star, double tie_tol) {
    auto out = open_out(path);
    out << "cell_index";
    for (int k = 1; k <= dom.dim; ++k) out << ",x_" << k;
    out << ",assigned_i,margin,tied_count\n";
    const int m = family.family_size;
    std::vector<double> costs(m);
    for (int c = 0; c < dom.num_cells(); ++c) {
        for (int i = 0; i < m; ++i) {
            costs[i] = field.value(c, i);
            const auto f = family.value(c, i);
            for (int k = 0; k < family.value_dim; ++k)
                costs[i] -= lambda_star[k] * f[k];
        }
        std::vector<double> sorted = costs;
        std::sort(sorted.begin(), sorted.end());
        const double margin = m > 1 ? sorted[1] - sorted[0] : 0.0;
        int tied = 0;
        for (double v : costs)
            if (v - sorted[0] <= tie_tol) ++tied;
        out << c;
        for (double x : dom.point(c)) out << ',' << fmt(x);
        out << ',' << (partition.assignment[c] >= 0 ? partition.assignment[c] + 1 : 0)
            << ',' << fmt(margin) << ',' << tied << "\n";
    }
}

}  // namespace lyap::cli
