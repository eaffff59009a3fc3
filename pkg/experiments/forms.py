from django import forms

from faces.axis import AxisMethod
from faces.eigen import DistanceMetric
from faces.stitching import StitchParams

from .corpus import OcclusionMode
from .services import ExperimentConfig, ProbeSet

STITCH_KEYS = ("search_radius", "band_width", "blend_levels", "feather_width")


class ExperimentConfigForm(forms.Form):
    """Проверка конфигурации эксперимента (ключи TOML-файла)"""

    k_values = forms.JSONField(required=False)
    metrics = forms.MultipleChoiceField(choices=DistanceMetric.choices, required=False)
    train_fraction = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    train_per_person = forms.IntegerField(required=False, min_value=1)
    occlusion = forms.ChoiceField(choices=OcclusionMode.choices, required=False)
    stitch_enabled = forms.NullBooleanField(required=False)
    seed = forms.IntegerField(required=False, min_value=0)
    normalize = forms.NullBooleanField(required=False)
    probe_set = forms.ChoiceField(choices=ProbeSet.choices, required=False)
    reject_unknown = forms.NullBooleanField(required=False)
    axis_method = forms.ChoiceField(
        choices=[(method, method.label) for method in (AxisMethod.MIRROR_SEARCH, AxisMethod.CASCADE)],
        required=False,
    )
    search_radius = forms.IntegerField(required=False, min_value=0)
    band_width = forms.IntegerField(required=False, min_value=2)
    blend_levels = forms.IntegerField(required=False, min_value=1)
    feather_width = forms.IntegerField(required=False, min_value=1)

    def clean_k_values(self):
        k_values = self.cleaned_data.get("k_values")
        if k_values in (None, "", []):
            return None
        if not isinstance(k_values, list) or not all(isinstance(k, int) and not isinstance(k, bool) for k in k_values):
            raise forms.ValidationError("k_values должен быть списком целых чисел")
        if any(k < 1 for k in k_values):
            raise forms.ValidationError("Все k должны быть не меньше 1")
        return k_values

    def clean(self):
        cleaned_data = super().clean()

        unknown = sorted(set(self.data) - set(self.fields))
        if unknown:
            raise forms.ValidationError(f"Неизвестные ключи конфигурации: {', '.join(unknown)}")

        fraction = cleaned_data.get("train_fraction")
        per_person = cleaned_data.get("train_per_person")
        if fraction is not None and per_person is not None:
            raise forms.ValidationError("Укажите только одно из train_fraction и train_per_person")
        if fraction is not None and not 0.0 < fraction < 1.0:
            self.add_error("train_fraction", "Доля обучающей части должна лежать строго между 0 и 1")

        return cleaned_data

    def to_config(self) -> ExperimentConfig:
        """ExperimentConfig с умолчаниями для незаданных ключей"""
        data = self.cleaned_data
        defaults = ExperimentConfig()
        stitch_defaults = StitchParams()

        def pick(name, fallback):
            value = data.get(name)
            return fallback if value in (None, "", []) else value

        per_person = data.get("train_per_person")
        return ExperimentConfig(
            k_values=tuple(pick("k_values", defaults.k_values)),
            metrics=tuple(pick("metrics", defaults.metrics)),
            train_fraction=None if per_person is not None else pick("train_fraction", defaults.train_fraction),
            train_per_person=per_person,
            occlusion=pick("occlusion", defaults.occlusion),
            stitch_enabled=pick("stitch_enabled", defaults.stitch_enabled),
            seed=pick("seed", defaults.seed),
            normalize=pick("normalize", defaults.normalize),
            probe_set=pick("probe_set", defaults.probe_set),
            reject_unknown=pick("reject_unknown", defaults.reject_unknown),
            axis_method=pick("axis_method", defaults.axis_method),
            stitch=StitchParams(**{key: pick(key, getattr(stitch_defaults, key)) for key in STITCH_KEYS}),
        )
