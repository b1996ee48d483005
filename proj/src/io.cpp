#include "gsmap/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gsmap/pca.hpp"

namespace gsmap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_f32(std::string& out, double v) {
    float f = float(v);
    uint32_t u;
    std::memcpy(&u, &f, 4);
    out.push_back(char(u & 0xff));
    out.push_back(char((u >> 8) & 0xff));
    out.push_back(char((u >> 16) & 0xff));
    out.push_back(char((u >> 24) & 0xff));
}

float get_f32(const unsigned char* p) {
    uint32_t u = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
                 uint32_t(p[3]) << 24;
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct PlyHeader {
    long vertex_count = -1;
    std::vector<std::string> properties;
    std::vector<std::pair<std::string, std::string>> comments; // key, rest
    size_t data_offset = 0;
};

PlyHeader parse_ply_header(const std::string& bytes, const std::string& path) {
    PlyHeader hdr;
    size_t pos = 0;
    bool ended = false;
    bool first = true;
    while (pos < bytes.size()) {
        size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos) break;
        std::string line = bytes.substr(pos, eol - pos);
        pos = eol + 1;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (first) {
            if (tok != "ply") throw std::runtime_error(path + ": not a PLY file");
            first = false;
            continue;
        }
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian")
                throw std::runtime_error(path + ": unsupported PLY format " + fmt);
        } else if (tok == "comment") {
            std::string key, rest;
            ls >> key;
            std::getline(ls, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            hdr.comments.emplace_back(key, rest);
        } else if (tok == "element") {
            std::string name;
            long n = 0;
            ls >> name >> n;
            if (name != "vertex")
                throw std::runtime_error(path + ": unsupported PLY element " + name);
            hdr.vertex_count = n;
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float")
                throw std::runtime_error(path + ": unsupported property type " + type);
            hdr.properties.push_back(name);
        } else if (tok == "end_header") {
            hdr.data_offset = pos;
            ended = true;
            break;
        }
    }
    if (!ended || hdr.vertex_count < 0)
        throw std::runtime_error(path + ": malformed PLY header");
    const size_t need = hdr.data_offset + size_t(hdr.vertex_count) * hdr.properties.size() * 4;
    if (bytes.size() < need) throw std::runtime_error(path + ": truncated PLY data");
    return hdr;
}

int property_index(const PlyHeader& hdr, const std::string& name, const std::string& path) {
    for (size_t i = 0; i < hdr.properties.size(); ++i)
        if (hdr.properties[i] == name) return int(i);
    throw std::runtime_error(path + ": missing property " + name);
}

std::vector<std::string> gaussian_properties(int sh_degree, int feat_dim) {
    std::vector<std::string> props = {"x",       "y",       "z",       "rot_0",  "rot_1",
                                      "rot_2",   "rot_3",   "scale_0", "scale_1", "scale_2",
                                      "opacity", "f_dc_0",  "f_dc_1",  "f_dc_2"};
    if (sh_degree >= 1)
        for (int i = 0; i < 9; ++i) props.push_back("f_rest_" + std::to_string(i));
    for (int i = 0; i < feat_dim; ++i) props.push_back("feat_" + std::to_string(i));
    return props;
}

std::string frame_stem(int traversal, int index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "traversal_%03d/frame_%04d", traversal, index);
    return buf;
}

json pose_to_json(const CameraPose& pose) {
    json r = json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.push_back(pose.R(i, j));
    json t = json::array();
    for (int i = 0; i < 3; ++i) t.push_back(pose.t[i]);
    return json{{"R", r}, {"t", t}};
}

CameraPose pose_from_json(const json& j, const std::string& path) {
    if (!j.contains("R") || !j.contains("t") || j["R"].size() != 9 || j["t"].size() != 3)
        throw std::runtime_error(path + ": frame entry missing R/t");
    CameraPose pose;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) pose.R(i, k) = j["R"][size_t(i * 3 + k)].get<double>();
    for (int i = 0; i < 3; ++i) pose.t[i] = j["t"][size_t(i)].get<double>();
    return pose;
}

} // namespace

void save_gaussians(const GaussianMap& map, const std::string& path) {
    map.validate();
    const std::vector<std::string> props = gaussian_properties(map.sh_degree, map.feat_dim);
    std::ostringstream hdr;
    hdr << "ply\nformat binary_little_endian 1.0\n";
    hdr << "comment feat_dim " << map.feat_dim << "\n";
    hdr << "comment sh_degree " << map.sh_degree << "\n";
    hdr << "element vertex " << map.size() << "\n";
    for (const std::string& p : props) hdr << "property float " << p << "\n";
    hdr << "end_header\n";

    std::string bytes = hdr.str();
    bytes.reserve(bytes.size() + map.size() * props.size() * 4);
    const int coeffs = map.sh_degree >= 1 ? 4 : 1;
    for (const Gaussian3D& g : map.gaussians) {
        for (int i = 0; i < 3; ++i) put_f32(bytes, g.mu[i]);
        for (int i = 0; i < 4; ++i) put_f32(bytes, g.q[i]);
        for (int i = 0; i < 3; ++i) put_f32(bytes, g.log_s[i]);
        put_f32(bytes, g.alpha_logit);
        for (int i = 0; i < 3; ++i) put_f32(bytes, g.sh[0][i]);
        for (int c = 1; c < coeffs; ++c)
            for (int i = 0; i < 3; ++i) put_f32(bytes, g.sh[size_t(c)][i]);
        for (int i = 0; i < map.feat_dim; ++i) put_f32(bytes, g.feat[i]);
    }
    write_file(path, bytes);
}

GaussianMap load_gaussians(const std::string& path) {
    const std::string bytes = read_file(path);
    const PlyHeader hdr = parse_ply_header(bytes, path);

    int feat_dim = -1, sh_degree = -1;
    for (const auto& [key, rest] : hdr.comments) {
        if (key == "feat_dim") feat_dim = std::atoi(rest.c_str());
        if (key == "sh_degree") sh_degree = std::atoi(rest.c_str());
    }
    if (feat_dim < 0) {
        feat_dim = 0;
        while (true) {
            std::string name = "feat_" + std::to_string(feat_dim);
            bool found = false;
            for (const std::string& p : hdr.properties) found = found || p == name;
            if (!found) break;
            ++feat_dim;
        }
    }
    if (sh_degree < 0) {
        sh_degree = 0;
        for (const std::string& p : hdr.properties)
            if (p == "f_rest_0") sh_degree = 1;
    }
    if (sh_degree != 0 && sh_degree != 1)
        throw std::runtime_error(path + ": unsupported sh_degree");

    const std::vector<std::string> props = gaussian_properties(sh_degree, feat_dim);
    std::vector<int> col(props.size());
    for (size_t i = 0; i < props.size(); ++i) col[i] = property_index(hdr, props[i], path);

    const size_t stride = hdr.properties.size() * 4;
    const unsigned char* data =
        reinterpret_cast<const unsigned char*>(bytes.data()) + hdr.data_offset;

    GaussianMap map;
    map.feat_dim = feat_dim;
    map.sh_degree = sh_degree;
    map.gaussians.resize(size_t(hdr.vertex_count));
    const int coeffs = sh_degree >= 1 ? 4 : 1;
    for (long v = 0; v < hdr.vertex_count; ++v) {
        const unsigned char* row = data + size_t(v) * stride;
        auto val = [&](size_t prop) {
            double x = double(get_f32(row + size_t(col[prop]) * 4));
            if (!std::isfinite(x))
                throw std::runtime_error(path + ": non-finite value in property " + props[prop]);
            return x;
        };
        Gaussian3D& g = map.gaussians[size_t(v)];
        size_t p = 0;
        for (int i = 0; i < 3; ++i) g.mu[i] = val(p++);
        for (int i = 0; i < 4; ++i) g.q[i] = val(p++);
        for (int i = 0; i < 3; ++i) g.log_s[i] = val(p++);
        g.alpha_logit = val(p++);
        for (int i = 0; i < 3; ++i) g.sh[0][i] = val(p++);
        for (int c = 1; c < coeffs; ++c)
            for (int i = 0; i < 3; ++i) g.sh[size_t(c)][i] = val(p++);
        g.feat.resize(feat_dim);
        for (int i = 0; i < feat_dim; ++i) g.feat[i] = val(p++);
    }
    map.validate();
    return map;
}

void save_point_cloud(const PointCloud& pc, const std::string& path) {
    const bool colored = !pc.colors.empty();
    if (colored && pc.colors.size() != pc.points.size())
        throw std::runtime_error(path + ": color count mismatch");
    std::ostringstream hdr;
    hdr << "ply\nformat binary_little_endian 1.0\n";
    hdr << "element vertex " << pc.points.size() << "\n";
    hdr << "property float x\nproperty float y\nproperty float z\n";
    if (colored) hdr << "property float red\nproperty float green\nproperty float blue\n";
    hdr << "end_header\n";
    std::string bytes = hdr.str();
    for (size_t i = 0; i < pc.points.size(); ++i) {
        for (int k = 0; k < 3; ++k) put_f32(bytes, pc.points[i][k]);
        if (colored)
            for (int k = 0; k < 3; ++k) put_f32(bytes, pc.colors[i][k]);
    }
    write_file(path, bytes);
}

PointCloud load_point_cloud(const std::string& path) {
    const std::string bytes = read_file(path);
    const PlyHeader hdr = parse_ply_header(bytes, path);
    const int cx = property_index(hdr, "x", path);
    const int cy = property_index(hdr, "y", path);
    const int cz = property_index(hdr, "z", path);
    int cr = -1, cg = -1, cb = -1;
    for (size_t i = 0; i < hdr.properties.size(); ++i) {
        if (hdr.properties[i] == "red") cr = int(i);
        if (hdr.properties[i] == "green") cg = int(i);
        if (hdr.properties[i] == "blue") cb = int(i);
    }
    const bool colored = cr >= 0 && cg >= 0 && cb >= 0;
    const size_t stride = hdr.properties.size() * 4;
    const unsigned char* data =
        reinterpret_cast<const unsigned char*>(bytes.data()) + hdr.data_offset;
    PointCloud pc;
    pc.points.resize(size_t(hdr.vertex_count));
    if (colored) pc.colors.resize(size_t(hdr.vertex_count));
    for (long v = 0; v < hdr.vertex_count; ++v) {
        const unsigned char* row = data + size_t(v) * stride;
        pc.points[size_t(v)] = Vec3(get_f32(row + size_t(cx) * 4), get_f32(row + size_t(cy) * 4),
                                    get_f32(row + size_t(cz) * 4));
        if (colored)
            pc.colors[size_t(v)] =
                Vec3(get_f32(row + size_t(cr) * 4), get_f32(row + size_t(cg) * 4),
                     get_f32(row + size_t(cb) * 4));
    }
    return pc;
}

void write_dataset(const MultitraverseDataset& ds, const std::string& dir,
                   const GroundTruthBundle* gt) {
    ds.validate();
    if (gt && gt->transient_masks.size() != ds.frames.size())
        throw std::runtime_error("write_dataset: ground truth frame count mismatch");
    fs::create_directories(dir);

    json manifest;
    const CameraIntrinsics& intr = ds.frames[0].intr;
    manifest["width"] = intr.width;
    manifest["height"] = intr.height;
    manifest["fx"] = intr.fx;
    manifest["fy"] = intr.fy;
    manifest["cx"] = intr.cx;
    manifest["cy"] = intr.cy;
    manifest["traversals"] = ds.traversal_count;
    manifest["frames"] = json::array();

    int prev_traversal = -1, index = 0;
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        const Frame& f = ds.frames[i];
        index = f.traversal == prev_traversal ? index + 1 : 0;
        prev_traversal = f.traversal;
        const std::string stem = frame_stem(f.traversal, index);
        fs::create_directories((fs::path(dir) / stem).parent_path());

        write_png(dir + "/" + stem + ".png", f.image);
        json entry{{"traversal", f.traversal}, {"file", stem + ".png"}};
        if (!f.feat.empty()) {
            write_f32(dir + "/" + stem + ".feat", f.feat);
            entry["feat"] = stem + ".feat";
        }
        if (!f.sky_mask.empty()) {
            write_png(dir + "/" + stem + ".sky.png", f.sky_mask);
            entry["sky"] = stem + ".sky.png";
        }
        entry["pose"] = pose_to_json(f.pose);
        manifest["frames"].push_back(std::move(entry));

        if (gt) {
            const fs::path gdir = fs::path(dir) / "gt" / (fs::path(stem).parent_path());
            fs::create_directories(gdir);
            write_png(dir + "/gt/" + stem + ".mask.png", gt->transient_masks[i]);
            write_f32(dir + "/gt/" + stem + ".depth.f32", gt->depths[i]);
            write_png(dir + "/gt/" + stem + ".bg.png", gt->backgrounds[i]);
        }
    }
    write_file(dir + "/poses.json", manifest.dump(1) + "\n");
    save_point_cloud(ds.seed_points, dir + "/seed_points.ply");
    if (gt) save_point_cloud(gt->surface_samples, dir + "/gt/surface_samples.ply");
}

MultitraverseDataset load_dataset(const std::string& dir, int target_feat_dim) {
    const std::string manifest_path = dir + "/poses.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw std::runtime_error(manifest_path + ": " + e.what());
    }

    CameraIntrinsics intr;
    intr.width = manifest.at("width").get<int>();
    intr.height = manifest.at("height").get<int>();
    intr.fx = manifest.at("fx").get<double>();
    intr.fy = manifest.at("fy").get<double>();
    intr.cx = manifest.at("cx").get<double>();
    intr.cy = manifest.at("cy").get<double>();

    MultitraverseDataset ds;
    ds.traversal_count = manifest.at("traversals").get<int>();
    for (const json& entry : manifest.at("frames")) {
        Frame f;
        f.intr = intr;
        f.traversal = entry.at("traversal").get<int>();
        if (!entry.contains("pose"))
            throw std::runtime_error(manifest_path + ": frame missing pose: " +
                                     entry.value("file", std::string("?")));
        f.pose = pose_from_json(entry["pose"], manifest_path);
        const std::string img_path = dir + "/" + entry.at("file").get<std::string>();
        f.image = read_png(img_path);
        if (f.image.c != 3) throw std::runtime_error(img_path + ": expected rgb image");
        if (entry.contains("feat")) f.feat = read_f32(dir + "/" + entry["feat"].get<std::string>());
        if (entry.contains("sky"))
            f.sky_mask = read_png_u8(dir + "/" + entry["sky"].get<std::string>());
        f.validate();
        ds.frames.push_back(std::move(f));
    }
    if (fs::exists(dir + "/seed_points.ply"))
        ds.seed_points = load_point_cloud(dir + "/seed_points.ply");
    ds.validate();

    if (target_feat_dim > 0 && !ds.frames.empty() && !ds.frames[0].feat.empty() &&
        ds.frames[0].feat.c > target_feat_dim) {
        std::vector<ImageD> feats;
        feats.reserve(ds.frames.size());
        for (Frame& f : ds.frames) feats.push_back(std::move(f.feat));
        const PcaModel model = pca_fit_frames(feats, target_feat_dim);
        for (size_t i = 0; i < ds.frames.size(); ++i)
            ds.frames[i].feat = quantize_f32(pca_apply(model, feats[i]));
    }
    return ds;
}

GroundTruthBundle load_ground_truth(const std::string& dir) {
    const std::string manifest_path = dir + "/poses.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw std::runtime_error(manifest_path + ": " + e.what());
    }
    GroundTruthBundle gt;
    int prev_traversal = -1, index = 0;
    for (const json& entry : manifest.at("frames")) {
        const int traversal = entry.at("traversal").get<int>();
        index = traversal == prev_traversal ? index + 1 : 0;
        prev_traversal = traversal;
        const std::string stem = frame_stem(traversal, index);
        gt.transient_masks.push_back(read_png_u8(dir + "/gt/" + stem + ".mask.png"));
        gt.depths.push_back(read_f32(dir + "/gt/" + stem + ".depth.f32"));
        gt.backgrounds.push_back(read_png(dir + "/gt/" + stem + ".bg.png"));
        if (entry.contains("sky"))
            gt.sky_masks.push_back(read_png_u8(dir + "/" + entry["sky"].get<std::string>()));
    }
    gt.surface_samples = load_point_cloud(dir + "/gt/surface_samples.ply");
    if (fs::exists(dir + "/seed_points.ply"))
        gt.seed_points = load_point_cloud(dir + "/seed_points.ply");
    return gt;
}

} // namespace gsmap
