"""Hash-consed immutable tree nodes.

Every node class lists its ``fields``; constructing a node with field values
equal to an existing live node returns that same object.  Equality is
therefore identity and hashing is O(1), which keeps memoized state-space
search cheap even for deep monitor terms.
"""

import weakref

_TABLE = weakref.WeakValueDictionary()


class Node:
    __slots__ = ("__weakref__", "_text")
    fields = ()

    def __new__(cls, *args):
        if len(args) != len(cls.fields):
            raise TypeError(f"{cls.__name__} expects {len(cls.fields)} arguments")
        key = (cls,) + args
        node = _TABLE.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        for name, value in zip(cls.fields, args):
            object.__setattr__(node, name, value)
        object.__setattr__(node, "_text", None)
        _TABLE[key] = node
        return node

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __reduce__(self):
        return (type(self), self.args())

    def args(self):
        return tuple(getattr(self, name) for name in self.fields)

    def __repr__(self):
        inner = ", ".join(repr(a) for a in self.args())
        return f"{type(self).__name__}({inner})"

    def cached_text(self, render):
        """Return ``render(self)``, computed at most once per node."""
        if self._text is None:
            object.__setattr__(self, "_text", render(self))
        return self._text
