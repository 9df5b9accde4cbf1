#include "nozzle/errors.hpp"
#include "nozzle/optimizer.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nozzle {

void write_checkpoint(const std::string& path, const std::vector<Evaluation>& history) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write checkpoint " + tmp);
        char buf[32];
        out << "# feasible f x...\n";
        for (const auto& ev : history) {
            out << (ev.feasible ? 1 : 0);
            std::snprintf(buf, sizeof buf, "%.17g", ev.f);
            out << ' ' << buf;
            for (double x : ev.x) {
                std::snprintf(buf, sizeof buf, "%.17g", x);
                out << ' ' << buf;
            }
            out << '\n';
        }
    }
    // Rename so an interrupted write never leaves a truncated checkpoint.
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move checkpoint into " + path);
}

std::vector<Evaluation> read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint " + path);
    std::vector<Evaluation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int feasible = 0;
        Evaluation ev;
        if (!(ss >> feasible >> ev.f)) throw ParseError(path + ":" + std::to_string(lineno) + ": malformed entry");
        ev.feasible = feasible != 0;
        double x = 0.0;
        while (ss >> x) ev.x.push_back(x);
        if (!ss.eof()) throw ParseError(path + ":" + std::to_string(lineno) + ": malformed coordinate");
        if (!out.empty() && ev.x.size() != out.front().x.size()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": inconsistent dimension");
        }
        out.push_back(std::move(ev));
    }
    return out;
}

std::function<double(const std::vector<double>&)> replaying_objective(
    std::vector<Evaluation> history, std::function<double(const std::vector<double>&)> objective) {
    return [history = std::move(history), objective = std::move(objective)](const std::vector<double>& x) {
        for (const auto& ev : history) {
            if (ev.x == x) {
                if (!ev.feasible) throw Error("recorded evaluation failure");
                return ev.f;
            }
        }
        return objective(x);
    };
}

}  // namespace nozzle
