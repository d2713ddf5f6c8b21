#include "sonovis/ad/checkpoint.hpp"

#include <unistd.h>

#include <fstream>

#include "sonovis/core/tensor_file.hpp"

namespace sonovis::ad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_group(const fs::path& dir, const std::vector<std::pair<std::string, Tensor>>& group) {
    if (group.empty()) return;
    fs::create_directories(dir);
    for (const auto& [name, tensor] : group) write_vtsr(dir / (name + ".vtsr"), tensor);
}

std::vector<std::pair<std::string, Tensor>> read_group(const fs::path& dir,
                                                       const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(names.size());
    for (const auto& name : names) out.emplace_back(name, read_vtsr(dir / (name + ".vtsr")));
    return out;
}

json names_of(const std::vector<std::pair<std::string, Tensor>>& group) {
    json arr = json::array();
    for (const auto& [name, _] : group) arr.push_back(name);
    return arr;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const CheckpointData& data) {
    const fs::path tmp = dir.string() + ".tmp-" + std::to_string(::getpid());
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    json meta = data.meta;
    meta["format"] = "sonovis-checkpoint-v1";
    meta["files"] = {{"params", names_of(data.params)},
                     {"buffers", names_of(data.buffers)},
                     {"optimizer", !data.opt_m.empty()}};
    {
        std::ofstream out(tmp / "meta.json");
        out << meta.dump(2) << "\n";
        require(out.good(), ErrorCode::Runtime, "checkpoint: cannot write meta.json");
    }
    for (const auto& [name, doc] : data.extra) {
        std::ofstream out(tmp / name);
        out << doc.dump(2) << "\n";
        require(out.good(), ErrorCode::Runtime, "checkpoint: cannot write " + name);
    }
    write_group(tmp / "params", data.params);
    write_group(tmp / "buffers", data.buffers);
    write_group(tmp / "opt" / "m", data.opt_m);
    write_group(tmp / "opt" / "v", data.opt_v);

    const fs::path old = dir.string() + ".old-" + std::to_string(::getpid());
    if (fs::exists(dir)) fs::rename(dir, old);
    fs::rename(tmp, dir);
    fs::remove_all(old);
}

CheckpointData load_checkpoint(const fs::path& dir) {
    require(fs::exists(dir / "meta.json"), ErrorCode::MissingInput,
            "checkpoint not found: " + dir.string());
    CheckpointData data;
    {
        std::ifstream in(dir / "meta.json");
        in >> data.meta;
        require(in.good() || in.eof(), ErrorCode::InvalidInput,
                "checkpoint: unreadable meta.json in " + dir.string());
    }
    require(data.meta.value("format", "") == "sonovis-checkpoint-v1", ErrorCode::Incompatible,
            "checkpoint: unknown format in " + dir.string());

    const json& files = data.meta.at("files");
    data.params = read_group(dir / "params", files.at("params").get<std::vector<std::string>>());
    data.buffers = read_group(dir / "buffers", files.at("buffers").get<std::vector<std::string>>());
    if (files.value("optimizer", false)) {
        auto names = files.at("params").get<std::vector<std::string>>();
        data.opt_m = read_group(dir / "opt" / "m", names);
        data.opt_v = read_group(dir / "opt" / "v", names);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "meta.json") {
            std::ifstream in(entry.path());
            json doc;
            in >> doc;
            data.extra[entry.path().filename().string()] = std::move(doc);
        }
    }
    return data;
}

}  // namespace sonovis::ad
