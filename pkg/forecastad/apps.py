from django.apps import AppConfig


class ForecastADConfig(AppConfig):
    name = 'forecastad'
    verbose_name = 'Forecasting-residual anomaly detection'
