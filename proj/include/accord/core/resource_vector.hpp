#pragma once

namespace accord {

// Capacity or requirement across the four resource dimensions. cpu, ram and
// disk are fractional; gpu counts whole devices.
struct ResourceVector {
    double cpu = 0.0;
    double ram_gb = 0.0;
    double disk_gb = 0.0;
    int gpu = 0;

    bool valid() const {
        return cpu >= 0.0 && ram_gb >= 0.0 && disk_gb >= 0.0 && gpu >= 0;
    }

    ResourceVector& operator+=(const ResourceVector& o) {
        cpu += o.cpu;
        ram_gb += o.ram_gb;
        disk_gb += o.disk_gb;
        gpu += o.gpu;
        return *this;
    }

    ResourceVector& operator-=(const ResourceVector& o) {
        cpu -= o.cpu;
        ram_gb -= o.ram_gb;
        disk_gb -= o.disk_gb;
        gpu -= o.gpu;
        return *this;
    }

    friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
    friend ResourceVector operator-(ResourceVector a, const ResourceVector& b) { return a -= b; }

    bool operator==(const ResourceVector&) const = default;
};

// Component-wise req <= avail on all four dimensions.
inline bool fits(const ResourceVector& req, const ResourceVector& avail) {
    return req.cpu <= avail.cpu && req.ram_gb <= avail.ram_gb &&
           req.disk_gb <= avail.disk_gb && req.gpu <= avail.gpu;
}

inline ResourceVector component_max(const ResourceVector& a, const ResourceVector& b) {
    return ResourceVector{
        a.cpu > b.cpu ? a.cpu : b.cpu,
        a.ram_gb > b.ram_gb ? a.ram_gb : b.ram_gb,
        a.disk_gb > b.disk_gb ? a.disk_gb : b.disk_gb,
        a.gpu > b.gpu ? a.gpu : b.gpu,
    };
}

}  // namespace accord
