"""Storage-tier and namespace arithmetic over the declared inventory.

Raw capacities are computed in decimal units (1 PB = 1000 TB) from drive
inventories.  Namespace net sizes stay in binary PiB exactly as declared,
and namespace bandwidths are declared data, never derived: the published
per-namespace figures are not additive over appliances, so any derivation
would be a fit the data cannot support.
"""

from __future__ import annotations

from .hardware import MachineSpec, StorageSpec


class StorageError(ValueError):
    """Unknown tier/model or an inventory over-allocation."""


def per_module_capacity(spec: MachineSpec, model: str) -> float:
    """Raw drive capacity of one appliance module, in decimal PB."""
    try:
        appliance = spec.storage.appliances[model]
    except KeyError:
        raise StorageError(f"unknown appliance model {model!r}") from None
    return appliance.drives.count * appliance.drives.size_tb / 1000.0


def tier_raw_capacity(spec: MachineSpec, tier: str) -> float:
    """Raw capacity of a storage tier, in decimal PB."""
    try:
        mix = spec.storage.tiers[tier]
    except KeyError:
        raise StorageError(f"unknown storage tier {tier!r}") from None
    return sum(count * per_module_capacity(spec, model) for model, count in sorted(mix.items()))


def _check_allocation(storage: StorageSpec, usage: dict[str, int], what: str) -> None:
    for model in sorted(usage):
        if model not in storage.appliances:
            raise StorageError(f"{what}: unknown appliance model {model!r}")
        available = storage.appliances[model].count
        if usage[model] > available:
            raise StorageError(
                f"{what}: allocates {usage[model]} x {model} but only {available} exist"
            )


def namespace_summary(spec: MachineSpec) -> list[dict]:
    """Declared namespace figures with the appliance mix cross-checked
    against inventory; raw capacity of each mix is computed alongside."""
    storage = spec.storage
    total_use: dict[str, int] = {}
    rows = []
    for namespace in storage.namespaces:
        _check_allocation(storage, namespace.appliance_mix, namespace.path)
        for model, count in namespace.appliance_mix.items():
            total_use[model] = total_use.get(model, 0) + count
        raw_pb = sum(
            count * per_module_capacity(spec, model)
            for model, count in sorted(namespace.appliance_mix.items())
        )
        rows.append(
            {
                "path": namespace.path,
                "net_size_pib": namespace.declared_net_size_pib,
                "bandwidth_gbs": namespace.declared_bandwidth_gbs,
                "appliance_mix": dict(sorted(namespace.appliance_mix.items())),
                "raw_capacity_pb": raw_pb,
            }
        )
    _check_allocation(storage, total_use, "namespaces combined")
    return rows
