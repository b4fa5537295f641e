"""
URL configuration for config project.

Конвейер работает через команды manage.py; по HTTP доступна только админка
с таблицей прогонов экспериментов.
"""
from django.contrib import admin
from django.urls import path

# Импортируем настройки админки
from . import admin_config  # noqa: F401

urlpatterns = [
    path('admin/', admin.site.urls),
]
