package com.shop.catalog;

public class Product {
    private final String sku;
    private final String title;

    public Product(String sku, String title) {
        this.sku = sku;
        this.title = title;
    }

    public String getTitle() {
        return title;
    }
}
