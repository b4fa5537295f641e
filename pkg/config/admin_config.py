from django.contrib import admin

# Настройки админки
admin.site.site_header = "Дифференциация шизофрении и биполярного расстройства по rsfMRI"
admin.site.site_title = "Дифференциация SZ/BP"
admin.site.index_title = "Прогоны экспериментов"
