#include "eastlab/lattice.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace eastlab
{

Box::Box(int dim, int side_length)
    : dim_(dim), side_length_(side_length), size_(1), strides_(dim > 0 ? dim : 0)
{
    if (dim < 1)
        throw std::invalid_argument("box dimension must be >= 1, got " + std::to_string(dim));
    if (side_length < 0)
        throw std::invalid_argument("box side must be >= 0, got " + std::to_string(side_length));

    const VertexIndex radix = side_length + 1;
    for (int i = 0; i < dim; ++i) {
        strides_[i] = size_;
        if (size_ > std::numeric_limits<VertexIndex>::max() / radix)
            throw std::invalid_argument("box has too many vertices to index");
        size_ *= radix;
    }
}

bool Box::contains(const Vertex& x) const
{
    return x.size() == dim_ && (x.array() >= 0).all() && (x.array() <= side_length_).all();
}

VertexIndex Box::encode(const Vertex& x) const
{
    if (!contains(x))
        throw std::invalid_argument("vertex outside the box");
    VertexIndex index = 0;
    for (int i = 0; i < dim_; ++i)
        index += strides_[i] * x[i];
    return index;
}

Vertex Box::decode(VertexIndex index) const
{
    if (index < 0 || index >= size_)
        throw std::invalid_argument("vertex index out of range");
    Vertex x(dim_);
    for (int i = 0; i < dim_; ++i)
        x[i] = coordinate(index, i);
    return x;
}

int OrientedEdge::axis() const
{
    for (int i = 0; i < head.size(); ++i)
        if (head[i] != tail[i])
            return i;
    return -1;
}

OrientedEdge make_edge(const Vertex& tail, int axis)
{
    if (axis < 0 || axis >= tail.size())
        throw std::invalid_argument("edge axis out of range");
    return {tail, tail + unit_vector(static_cast<int>(tail.size()), axis)};
}

Vertex unit_vector(int dim, int axis)
{
    Vertex e = Vertex::Zero(dim);
    e[axis] = 1;
    return e;
}

Vertex diagonal(int dim, int scale)
{
    return Vertex::Constant(dim, scale);
}

std::vector<Vertex> update_neighborhood(const Vertex& x)
{
    const int d = static_cast<int>(x.size());
    std::vector<Vertex> neighbors;
    neighbors.reserve(d);
    for (int i = 0; i < d; ++i)
        neighbors.push_back(x - unit_vector(d, i));
    return neighbors;
}

bool precedes(const Vertex& x, const Vertex& y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("precedes: dimension mismatch");
    return (x.array() <= y.array()).all();
}

std::vector<Vertex> hyperplane_in_box(int k, const Box& box)
{
    std::vector<Vertex> slice;
    if (k < 0 || k > box.dim() * box.side_length())
        return slice;
    for (VertexIndex v = 0; v < box.size(); ++v) {
        int sum = 0;
        for (int i = 0; i < box.dim(); ++i)
            sum += box.coordinate(v, i);
        if (sum == k)
            slice.push_back(box.decode(v));
    }
    return slice;
}

int l1_norm(const Vertex& x)
{
    return x.cwiseAbs().sum();
}

int sup_norm(const Vertex& x)
{
    return x.size() == 0 ? 0 : x.cwiseAbs().maxCoeff();
}

} // namespace eastlab
