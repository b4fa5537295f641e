from django.contrib import admin
from django.utils.html import format_html

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['pair', 'split', 'auc_badge', 'n', 'runtime', 'fingerprint_short', 'created_at']
    list_filter = ['feature_set', 'model', 'split', 'created_at']
    search_fields = ['feature_set', 'model', 'fingerprint', 'output_dir']
    readonly_fields = ['created_at']

    fieldsets = (
        ('Эксперимент', {
            'fields': ('feature_set', 'model', 'split', 'auc', 'n', 'runtime')
        }),
        ('Воспроизводимость', {
            'fields': ('fingerprint', 'artifact_path', 'output_dir'),
        }),
        ('Служебное', {
            'fields': ('created_at',),
            'classes': ('collapse',)
        }),
    )

    def pair(self, obj):
        return f"{obj.feature_set} × {obj.model}"
    pair.short_description = 'Признаки × модель'

    def auc_badge(self, obj):
        color = '#28a745' if obj.auc >= 0.8 else '#ffc107' if obj.auc >= 0.6 else '#dc3545'
        return format_html(
            '<span style="background: {}; color: white; padding: 2px 8px; border-radius: 8px; font-weight: bold;">{}</span>',
            color, f'{obj.auc:.4f}'
        )
    auc_badge.short_description = 'AUC'

    def fingerprint_short(self, obj):
        return obj.fingerprint[:12] or "—"
    fingerprint_short.short_description = 'Отпечаток'
