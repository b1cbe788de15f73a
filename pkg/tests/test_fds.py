import numpy as np
import pytest

from terasense import catalog
from terasense.bench import SnrSpec
from terasense.constants import ATM, DEFAULT
from terasense.errors import AllocationError, DomainError
from terasense.fds import (
    CarrierPlan, FdsConfig, MixtureProfile, allocate_carriers, channel_magnitude,
    measure_channel, sense_mixture, spike_detect, success_curves,
)
from terasense.physics import (
    BROADENING_TO_SI, WAVENUMBER_TO_HZ, LineRecord, SpectralGrid, Spectrum, SpectrumKind,
    absorption_spectrum, free_space_gain,
)

BAND = (1e11, 1e12)
H2O_LINE = LineRecord(1, 1, 18.577 * WAVENUMBER_TO_HZ, 1e-19, 0.1 * BROADENING_TO_SI,
                      0.4 * BROADENING_TO_SI, 0.7, -0.002 * BROADENING_TO_SI)


def test_uniform_three_carriers():
    plan = allocate_carriers(CarrierPlan("uniform", 3, (1e11, 3e11)))
    np.testing.assert_allclose(plan.frequencies, [1e11, 2e11, 3e11], rtol=1e-15)
    assert allocate_carriers(CarrierPlan("uniform", 1, BAND)).frequencies[0] == pytest.approx(5.5e11)


def test_resonant_single_line_shifted():
    plan = allocate_carriers(CarrierPlan("resonant", 1, BAND, "H2O"), lines=[H2O_LINE], pressure=ATM)
    f0 = 18.577 * 100 * DEFAULT.speed_of_light
    shift = -0.002 * 100 * DEFAULT.speed_of_light  # cm^-1/atm at 1 atm
    assert plan.frequencies[0] == pytest.approx(f0 + shift, rel=1e-12)


def test_resonant_pads_and_fails():
    plan = allocate_carriers(CarrierPlan("resonant", 4, BAND, "H2O"), lines=[H2O_LINE])
    assert plan.resolved and len(plan.frequencies) == 4
    with pytest.raises(AllocationError):
        allocate_carriers(CarrierPlan("resonant", 2, (1e11, 2e11), "H2O"), lines=[H2O_LINE])
    with pytest.raises(AllocationError):
        allocate_carriers(CarrierPlan("resonant", 2, BAND))
    with pytest.raises(DomainError):
        CarrierPlan("resonant", 2, BAND).frequencies


def test_resonant_builtin_hits_water_lines():
    plan = allocate_carriers(CarrierPlan("resonant", 5, BAND, "H2O"))
    h2o = [ln for ln in catalog.builtin_lines() if ln.molecule_id == 1]
    centres = np.array([ln.resonance for ln in h2o])
    for f in plan.frequencies:
        assert np.min(np.abs(centres - f)) < 5e8


def test_random_plan_seeded():
    a = allocate_carriers(CarrierPlan("random", 20, BAND), seed=4).frequencies
    b = allocate_carriers(CarrierPlan("random", 20, BAND), seed=4).frequencies
    c = allocate_carriers(CarrierPlan("random", 20, BAND), seed=5).frequencies
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all(np.diff(a) >= 0) and a.min() >= BAND[0] and a.max() <= BAND[1]


def test_plan_validation():
    for bad in (dict(strategy="zigzag"), dict(count=0), dict(band=(2e11, 1e11))):
        kw = dict(strategy="uniform", count=3, band=BAND)
        kw.update(bad)
        with pytest.raises(DomainError):
            CarrierPlan(**kw)


def test_vacuum_channel_is_free_space():
    plan = allocate_carriers(CarrierPlan("uniform", 10, BAND))
    g = measure_channel(plan, MixtureProfile.vacuum(5.0))
    np.testing.assert_allclose(g, free_space_gain(plan.frequencies, 5.0), rtol=1e-15)
    assert np.all(np.diff(g) < 0)


def test_absorptive_medium_never_exceeds_vacuum():
    f = np.linspace(*BAND, 2000)
    vac = channel_magnitude(f, MixtureProfile.vacuum().medium)
    for name in ("dry", "humid", "polluted"):
        g = channel_magnitude(f, MixtureProfile.default(name).medium)
        assert np.all(g <= vac * (1 + 1e-15))
    humid = channel_magnitude(f, MixtureProfile.default("humid").medium)
    assert np.min(humid / vac) < 0.5  # strong water lines over 5 m


def test_measure_channel_noise_seeded():
    plan = allocate_carriers(CarrierPlan("uniform", 50, BAND))
    prof = MixtureProfile.default("humid")
    a = measure_channel(plan, prof, SnrSpec(20), seed=1)
    assert np.array_equal(a, measure_channel(plan, prof, 20, seed=1))
    assert not np.array_equal(a, measure_channel(plan, prof, 20, seed=2))
    assert np.array_equal(measure_channel(plan, prof), channel_magnitude(plan.frequencies, prof.medium))


def test_water_carrier_resolves_humidity():
    plan = allocate_carriers(CarrierPlan("resonant", 1, BAND, "H2O"))
    dry = measure_channel(plan, MixtureProfile.default("dry"))[0]
    humid = measure_channel(plan, MixtureProfile.default("humid"))[0]
    assert humid < dry


def _small_cfg(**kw):
    d = dict(band=BAND, per_class=20, folds=5, repetitions=2, snr_db=["inf"],
             plans=[{"strategy": "uniform", "count": 10},
                    {"strategy": "resonant", "count": 10, "target_species": ["H2O"]}])
    d.update(kw)
    return FdsConfig.from_dict(d)


def test_identical_profiles_chance_level():
    p = MixtureProfile.default("humid")
    twin = MixtureProfile("twin", p.medium)
    res = sense_mixture(_small_cfg(snr_db=[40], repetitions=4), profiles=[p, twin])
    for r in res:
        assert 0.3 <= r.success_rate_mean <= 0.7


def test_noiseless_profiles_separable():
    # humid and polluted differ only by trace CH4, so the resonant plan must sit on CH4 lines
    plans = [{"strategy": "uniform", "count": 10},
             {"strategy": "resonant", "count": 3, "target_species": ["CH4"]}]
    res = sense_mixture(_small_cfg(plans=plans))
    assert {r.extractor for r in res} == {"uniform-10:none", "resonant-CH4-3:none"}
    for r in res:
        assert r.success_rate_mean == 1.0


def test_sense_mixture_curves_and_config_errors():
    res = sense_mixture(_small_cfg(snr_db=[0, 60]))
    curves = success_curves(res)
    for snr, rate in curves.values():
        assert list(snr) == [0.0, 60.0]
        assert rate[1] >= rate[0]
    with pytest.raises(DomainError, match="band"):
        FdsConfig.from_dict({})
    with pytest.raises(DomainError, match="unknown"):
        FdsConfig.from_dict({"band": BAND, "colour": 1})
    with pytest.raises(DomainError, match="profiles"):
        FdsConfig.from_dict({"band": BAND, "profiles": ["dry"]})


def _absorption(profile, n=4000):
    grid = SpectralGrid.linspace(*BAND, n)
    medium = MixtureProfile.default(profile).medium if profile != "vacuum" else MixtureProfile.vacuum().medium
    if not medium.species:
        return Spectrum(grid, np.zeros(n), SpectrumKind.ABSORPTION_COEFFICIENT)
    return absorption_spectrum(grid, medium)


def test_spike_detect_cases():
    assert not any(spike_detect(_absorption("vacuum")).values())
    humid = spike_detect(_absorption("humid"))
    assert humid["H2O"]
    only_water = Spectrum(
        SpectralGrid.linspace(*BAND, 4000),
        absorption_spectrum(SpectralGrid.linspace(*BAND, 4000),
                            catalog.mixture({"H2O": 0.01})).values,
        SpectrumKind.ABSORPTION_COEFFICIENT)
    flags = spike_detect(only_water)
    assert flags["H2O"] and not flags.get("CH4", False)
    # threshold 0 flags every species with an in-band line and positive absorption
    zero = spike_detect(_absorption("polluted"), threshold=0.0)
    assert zero["H2O"]
    with pytest.raises(DomainError):
        spike_detect(_absorption("humid"), threshold=-1)
    with pytest.raises(DomainError):
        spike_detect(Spectrum(SpectralGrid.linspace(*BAND, 10), np.ones(10), SpectrumKind.TRANSMITTANCE))


def test_resonant_not_worse_than_uniform_on_most_points():
    cfg = FdsConfig(band=BAND)
    curves = success_curves(sense_mixture(cfg))
    snr, uni = curves["uniform-100:none"]
    _, res = curves["resonant-H2O-100:none"]
    assert np.sum(res >= uni) > snr.size / 2
    assert np.all(res[snr <= 10] > uni[snr <= 10])  # the gain shows where noise dominates
